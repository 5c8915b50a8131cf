use std::collections::HashSet;

use ldpkit::sgd::{gen_linear_task, private_sgd_train, GradientMechanism, ModelSpec, Task};
use ldpkit::numeric::NumericMechanism;
use ldpkit::{validate_budget, RandomSource};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn users_participate_at_most_once(n in 1usize..3000, batch in 1usize..400, seed in any::<u64>()) {
        prop_assume!(n >= batch);
        let (data, _) = gen_linear_task(n, 3, &mut RandomSource::new(seed)).unwrap();
        let spec = ModelSpec::new(Task::Linear, 4, 0.1, batch).unwrap();
        let run = private_sgd_train(
            &data,
            &spec,
            GradientMechanism::Numeric(NumericMechanism::Mech2),
            validate_budget(1.0, 1e-6).unwrap(),
            &mut RandomSource::new(seed),
            None,
        )
        .unwrap();
        prop_assert_eq!(run.iterations(), n / batch);
        prop_assert_eq!(run.users.len(), run.iterations() * batch);
        let unique: HashSet<usize> = run.users.iter().copied().collect();
        prop_assert_eq!(unique.len(), run.users.len());
    }
}
