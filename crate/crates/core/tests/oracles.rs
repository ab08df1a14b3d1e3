//! Values computed once by an independent numpy simulation (separate state
//! construction, observables and qubit ordering) and frozen here.

use approx::assert_abs_diff_eq;
use qnlb_core::protocols;
use qnlb_core::sdp::{self, IndexMap};
use qnlb_core::BoxParam;

fn bp(p: f64) -> BoxParam {
    BoxParam::new(p).unwrap()
}

const SIMULATED_VALUES: [(usize, f64, f64); 8] = [
    (1, 0.1, 2.860_635_997_575_759_6),
    (1, 0.6, 3.219_160_170_741_758_5),
    (2, 0.25, 2.995_233_768_197_027),
    (2, 0.45, 3.093_119_131_179_702_4),
    (3, 0.3, 3.067_754_459_198_077_7),
    (3, 0.5, 3.098_076_211_353_314_7),
    (4, 0.2, 3.039_799_255_859_920_7),
    (2, 0.8, 3.6),
];

#[test]
fn dense_values_match_simulation() {
    for (n, p, expected) in SIMULATED_VALUES {
        let dense = protocols::protocol_p_value_dense(n, bp(p)).unwrap();
        assert_abs_diff_eq!(dense.total, expected, epsilon = 1e-12);
    }
}

#[test]
fn closed_values_match_simulation() {
    for (n, p, expected) in SIMULATED_VALUES {
        let closed = protocols::protocol_p_value_closed(n, bp(p)).unwrap();
        assert_abs_diff_eq!(closed, expected, epsilon = 1e-12);
        let factored = protocols::protocol_p_value_factored(n, bp(p)).unwrap();
        assert_abs_diff_eq!(factored.total, expected, epsilon = 1e-12);
    }
}

#[test]
fn correlators_on_psi_all_equal_cos_phi() {
    for (n, p, _) in SIMULATED_VALUES {
        let b = protocols::protocol_p_value_dense(n, bp(p)).unwrap();
        let c = protocols::phi_angle(bp(p), n).unwrap().cos();
        for e in [b.e00, b.e01, b.e10] {
            assert_abs_diff_eq!(e, c, epsilon = 1e-12);
        }
    }
}

#[test]
fn two_copy_gram_entries() {
    let g = sdp::gram_from_protocol(2, bp(0.25)).unwrap();
    let idx = IndexMap::new(2);
    let entries = [
        (IndexMap::X0, IndexMap::X1, 0.3),
        (IndexMap::X0, IndexMap::Y0, 0.806_225_774_829_854_5),
        (IndexMap::X1, idx.z(0), -0.322_490_309_931_941_6),
        (IndexMap::X1, idx.z(1), -1.0),
        (IndexMap::X1, idx.z(3), -0.322_490_309_931_941_6),
        (idx.z(0), idx.z(3), 1.0),
        (idx.z(1), idx.z(2), 1.0),
        (IndexMap::Y0, idx.z(1), -0.806_225_774_829_854_6),
    ];
    for (i, j, v) in entries {
        assert_abs_diff_eq!(g.re(i, j), v, epsilon = 1e-12);
        assert_abs_diff_eq!(g.re(j, i), v, epsilon = 1e-12);
    }
}

#[test]
fn curve_spot_value() {
    // n = 3, p = ¼: (q−p)³ = ⅛, cos²φ = 25/36, value 73/24.
    let v = protocols::protocol_p_value_closed(3, bp(0.25)).unwrap();
    assert_abs_diff_eq!(v, 73.0 / 24.0, epsilon = 1e-12);
    let brute = protocols::parity_value_bruteforce(3, bp(0.25)).unwrap();
    assert_abs_diff_eq!(protocols::parity_value_closed(3, bp(0.25)).unwrap(), brute, epsilon = 1e-12);
}
