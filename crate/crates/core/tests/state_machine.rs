mod common;

use common::fuzz::{action, run_sequence};
use common::{pipeline, Responder};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn random_action_sequences_respect_stage_order(actions in prop::collection::vec(action(), 500)) {
        let p = pipeline(Responder);
        match run_sequence(&p, &actions) {
            Ok(stats) => prop_assert_eq!(stats.actions, 500),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

#[test]
fn happy_path_reaches_the_end() {
    use common::fuzz::Action::*;
    use ucm_core::Step::*;
    let p = pipeline(Responder);
    let script = [Run(Actors), Confirm, Run(Usecases), Confirm, Run(Model), Confirm, Run(Descriptions), Export(true)];
    let stats = run_sequence(&p, &script).unwrap();
    assert_eq!(stats.illegal, 0);
    assert_eq!(stats.reached.len(), 8);
    let out_of_order = [Run(Model), Confirm, Run(Usecases), Export(true), Run(Descriptions)];
    assert_eq!(run_sequence(&p, &out_of_order).unwrap().illegal, out_of_order.len());
}
