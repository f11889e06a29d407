//! Property tests for the invariants that want randomized coverage: the
//! signature distance is a metric, padding doesn't change statistics,
//! round-trips are lossless, and every differentiable op agrees with
//! finite differences on random shapes.

mod common;

use gatekit::aig::{parse_aiger, random_aig, write_aiger, RandomAigConfig};
use gatekit::grad::{Graph, Tensor, TensorId};
use gatekit::sim::{logic_prob, random_patterns, tt_distance, SimConfig, Signature};
use proptest::prelude::*;

fn signature(len_bits: usize, seed: u64) -> Signature {
    let sigs = random_patterns(
        1,
        &SimConfig {
            num_patterns: len_bits,
            seed,
            exhaustive_when_small: false,
        },
    );
    sigs.into_iter().next().expect("one pi")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// tt_distance is a metric: identity, symmetry, triangle inequality.
    #[test]
    fn distance_is_a_metric(len in 1usize..600, s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
        let a = signature(len, s1);
        let b = signature(len, s2);
        let c = signature(len, s3);
        prop_assert_eq!(tt_distance(&a, &a).unwrap(), 0.0);
        let ab = tt_distance(&a, &b).unwrap();
        let ba = tt_distance(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        let ac = tt_distance(&a, &c).unwrap();
        let cb = tt_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    /// Stats are invariant under re-packing with masked zero padding:
    /// compare a P-bit signature against the same bits materialized by
    /// pushing them one by one into a fresh (wider-capacity) signature.
    #[test]
    fn stats_invariant_under_padding(len in 1usize..300, s1 in 0u64..1000, s2 in 0u64..1000) {
        let a = signature(len, s1);
        let b = signature(len, s2);
        let mut a2 = Signature::zeros(0);
        let mut b2 = Signature::zeros(0);
        for k in 0..len {
            a2.push_bit(a.bit(k));
            b2.push_bit(b.bit(k));
        }
        prop_assert_eq!(logic_prob(&a), logic_prob(&a2));
        prop_assert_eq!(
            tt_distance(&a, &b).unwrap(),
            tt_distance(&a2, &b2).unwrap()
        );
    }

    /// AIGER round trip preserves structure (canonical-form comparison is
    /// covered in unit tests; here: node and kind counts, levels, POs).
    #[test]
    fn aiger_roundtrip_counts(seed in 0u64..500) {
        let aig = random_aig(&RandomAigConfig {
            num_pi: 4,
            num_gates: 20,
            seed,
            ..RandomAigConfig::default()
        });
        let once = parse_aiger(&write_aiger(&aig)).unwrap();
        let twice = parse_aiger(&write_aiger(&once)).unwrap();
        prop_assert_eq!(once.len(), twice.len());
        prop_assert_eq!(once.num_ands(), twice.num_ands());
        prop_assert_eq!(once.num_nots(), twice.num_nots());
        prop_assert_eq!(once.levels(), twice.levels());
        prop_assert_eq!(once.pos(), twice.pos());
    }
}

// ------------------------------------------------------------------------
// Finite-difference agreement per op, on random shapes.

fn rand_tensor(rng: &mut gatekit::rng::SplitMix64, rows: usize, cols: usize) -> Tensor {
    Tensor::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.next_normal() * 0.5).collect(),
    )
}

/// Check d(sum of all outputs)/d(param) against central differences for a
/// builder closure. The 1e-3 denominator floor turns the check into a
/// 1e-7 absolute bound for near-zero gradients.
fn check_op(
    build: impl Fn(&mut Graph, TensorId) -> TensorId,
    param: &Tensor,
    op_name: &str,
) {
    let loss_of = |t: &Tensor| -> f64 {
        let mut g = Graph::new();
        let id = g.leaf(t, false).unwrap();
        let out = build(&mut g, id);
        let s = g.sum_all(out).unwrap();
        g.scalar(s)
    };
    let mut g = Graph::new();
    let id = g.leaf(param, true).unwrap();
    let out = build(&mut g, id);
    let loss = g.sum_all(out).unwrap();
    let grads = g.backward(loss).unwrap();
    let analytic = grads.get(id).to_vec();
    let h = 1e-5;
    for k in 0..param.data.len() {
        let mut plus = param.clone();
        plus.data[k] += h;
        let mut minus = param.clone();
        minus.data[k] -= h;
        let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
        let rel = (analytic[k] - fd).abs() / analytic[k].abs().max(fd.abs()).max(1e-3);
        assert!(
            rel <= 1e-4,
            "{op_name}[{k}]: analytic {} vs fd {fd}",
            analytic[k]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ops_match_finite_differences(seed in 0u64..10_000, rows in 1usize..4, cols in 1usize..5) {
        let mut rng = gatekit::rng::SplitMix64::new(seed);
        let x = rand_tensor(&mut rng, rows, cols);
        let other = rand_tensor(&mut rng, rows, cols);
        let m2 = rand_tensor(&mut rng, cols, rows + 1);

        check_op(|g, id| {
            let c = g.leaf(&m2, false).unwrap();
            g.matmul(id, c).unwrap()
        }, &x, "matmul");
        check_op(|g, id| {
            let c = g.leaf(&other, false).unwrap();
            let s = g.add(id, c).unwrap();
            g.mul(s, id).unwrap()
        }, &x, "add+mul");
        check_op(|g, id| {
            let c = g.leaf(&other, false).unwrap();
            g.sub(id, c).unwrap()
        }, &x, "sub");
        check_op(|g, id| g.scale(id, -1.7).unwrap(), &x, "scale");
        check_op(|g, id| g.transpose(id).unwrap(), &x, "transpose");
        check_op(|g, id| {
            let c = g.leaf(&other, false).unwrap();
            g.concat_cols(&[id, c]).unwrap()
        }, &x, "concat_cols");
        check_op(|g, id| {
            let c = g.leaf(&other, false).unwrap();
            g.concat_rows(&[c, id]).unwrap()
        }, &x, "concat_rows");
        check_op(|g, id| g.softmax_rows(id).unwrap(), &x, "softmax");
        check_op(|g, id| g.relu(id).unwrap(), &x, "relu");
        check_op(|g, id| g.sigmoid(id).unwrap(), &x, "sigmoid");
        check_op(|g, id| g.abs(id).unwrap(), &x, "abs");
        check_op(|g, id| g.mean_all(id).unwrap(), &x, "mean");
        check_op(|g, id| g.center(id).unwrap(), &x, "center");
        check_op(|g, id| {
            let sig = g.sigmoid(id).unwrap();
            let t = g.constant(rows, cols, vec![1.0; rows * cols]).unwrap();
            g.bce_loss(sig, t).unwrap()
        }, &x, "bce");
    }

    #[test]
    fn cosine_matches_finite_differences(seed in 0u64..10_000, dim in 2usize..6) {
        let mut rng = gatekit::rng::SplitMix64::new(seed);
        let u = rand_tensor(&mut rng, 1, dim);
        let v = rand_tensor(&mut rng, 1, dim);
        // Degenerate zero vectors are rejected, not differentiated.
        prop_assume!(u.data.iter().any(|&x| x.abs() > 1e-3));
        prop_assume!(v.data.iter().any(|&x| x.abs() > 1e-3));
        check_op(|g, id| {
            let c = g.leaf(&v, false).unwrap();
            g.cosine(id, c).unwrap()
        }, &u, "cosine");
    }
}
