//! Property tests for the policy machinery: the six-parameter rows
//! against an independent enumeration of the scheduler, and the
//! counting laws of the streaming enumerators.

use proptest::prelude::*;

use stabreg::channel::LinkStateProbs;
use stabreg::policy::{
    enumerate_policies, policy_count, ss_params, ss_params_from_order, SsPolicy,
};

fn simplex3() -> impl Strategy<Value = LinkStateProbs> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        LinkStateProbs::new(vec![lo, hi - lo, 1.0 - hi]).unwrap()
    })
}

proptest! {
    #[test]
    fn table_rows_match_scheduler_enumeration(
        s in simplex3(),
        u in simplex3(),
        d in simplex3(),
    ) {
        for policy in SsPolicy::ALL {
            let row = ss_params(policy, &s, &u, &d);
            let oracle = ss_params_from_order(&policy.class_order(), &s, &u, &d);
            prop_assert!((row.u - oracle.u).abs() < 1e-12);
            prop_assert!((row.v - oracle.v).abs() < 1e-12);
            prop_assert!((row.w - oracle.w).abs() < 1e-12);
            prop_assert!((row.x - oracle.x).abs() < 1e-12);
            prop_assert!((row.y - oracle.y).abs() < 1e-12);
            prop_assert!((row.z - oracle.z).abs() < 1e-12);
        }
    }

    #[test]
    fn full_count_law(k in 0usize..4, u in 0usize..4) {
        prop_assume!(k + u >= 1 && k + u <= 6);
        let n = enumerate_policies(k, u, None).unwrap().count() as u128;
        let expect: u128 = (1..=(k + u) as u128).product();
        prop_assert_eq!(n, expect);
        prop_assert_eq!(policy_count(k, u, None), expect);
    }

    #[test]
    fn prefix_count_law(total in 1usize..8, depth in 0usize..4) {
        prop_assume!(depth <= total.min(3) && total <= 7);
        let n = enumerate_policies(total, 0, Some(depth)).unwrap().count() as u128;
        let expect: u128 = (((total - depth + 1) as u128)..=(total as u128)).product();
        prop_assert_eq!(n, expect);
    }
}

#[test]
fn fifty_flows_depth_three_prefix_count() {
    // 50 * 49 * 48 ordered prefixes; streamed, never materialized.
    let n = enumerate_policies(50, 0, Some(3)).unwrap().count();
    assert_eq!(n, 117_600);
    assert_eq!(policy_count(50, 0, Some(3)), 117_600);
}
