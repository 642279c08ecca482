use qpe_core::planner::{PlanInputs, QpePlan, TimeStepStrategy, TrotterConstant, CHEMICAL_ACCURACY, DEFAULT_A_SWEEP};

fn inputs(strategy: TimeStepStrategy) -> PlanInputs {
    PlanInputs {
        strategy,
        e_init: -1.042996,
        e0: Some(-1.055160),
        one_norm: 2.32397,
        energy_shift: 0.0,
        epsilon_chem: CHEMICAL_ACCURACY,
        a_sweep: DEFAULT_A_SWEEP.to_vec(),
        trotter: vec![TrotterConstant::Scaled { order: 1, value: 6e4 }],
    }
}

#[test]
fn plan_survives_json_and_rederives() {
    for strategy in [
        TimeStepStrategy::KnownGapOrder { d: 1 },
        TimeStepStrategy::InitEnergy { alpha: 1.5 },
        TimeStepStrategy::LcuOneNorm { alpha: 0.5 },
    ] {
        let plan = QpePlan::build(inputs(strategy)).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        let back: QpePlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.rederive().unwrap(), plan);
    }
}

#[test]
fn strategy_json_is_tagged() {
    let s = serde_json::to_value(TimeStepStrategy::InitEnergy { alpha: 1.5 }).unwrap();
    assert_eq!(s["kind"], "init-energy");
    assert_eq!(s["alpha"], 1.5);
}
