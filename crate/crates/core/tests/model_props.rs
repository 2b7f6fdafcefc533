use proptest::prelude::*;

use seqcontract::{rat, validate_instance, Instance, InstanceDocument, Rational};

/// Documents with shuffled (possibly repeated) rewards, zero reward included.
fn document() -> impl Strategy<Value = InstanceDocument> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        let rewards = prop::collection::vec(0i64..=5, m - 1);
        let costs = prop::collection::vec(0i64..=9, n);
        let cuts = prop::collection::vec(prop::collection::vec(0i64..=12, m - 1), n);
        (rewards, costs, cuts, any::<prop::sample::Index>()).prop_map(|(rewards, costs, cuts, at)| {
            let mut rewards: Vec<Rational> = rewards.into_iter().map(Rational::from_integer).collect();
            rewards.insert(at.index(rewards.len() + 1), Rational::zero());
            let probs = cuts
                .into_iter()
                .map(|mut c| {
                    c.push(0);
                    c.push(12);
                    c.sort();
                    c.windows(2).map(|w| rat(w[1] - w[0], 12)).collect()
                })
                .collect();
            InstanceDocument { rewards, costs: costs.into_iter().map(|c| rat(c, 10)).collect(), probs, meta: None }
        })
    })
}

proptest! {
    #[test]
    fn serialization_round_trips(doc in document()) {
        let first = validate_instance(&doc).unwrap();
        let text = first.instance.to_json();
        let again = Instance::from_json(&text).unwrap();
        prop_assert_eq!(&again.instance, &first.instance);
        prop_assert!(again.is_identity());
        prop_assert_eq!(again.instance.to_json(), text);
    }

    #[test]
    fn normalization_is_idempotent(doc in document()) {
        let once = validate_instance(&doc).unwrap();
        let twice = validate_instance(&once.instance.to_document()).unwrap();
        prop_assert_eq!(&twice.instance, &once.instance);
        for w in once.instance.rewards().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        // Every original outcome lands somewhere with its reward intact.
        for (new, &old) in once.permutation.iter().enumerate() {
            prop_assert_eq!(once.instance.reward(new), &doc.rewards[old]);
        }
    }
}
