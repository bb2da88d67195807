//! Algebraic laws of the symbolic mean, variance, covariance and
//! correlation, shared by the property suite and the acceptance target.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use symcov_core::algebra::transform_dataset;
use symcov_core::{
    population_cor_matrix, population_cov_matrix, sample_cor_matrix, sample_cov_matrix,
    sample_mean, CovKind, Interval, IntervalDataset, PopulationParams, SymmetricMatrix,
};

pub type Check = Result<(), TestCaseError>;

pub fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()).max(scale))
}

macro_rules! assert_close {
    ($a:expr, $b:expr, $scale:expr, $($msg:tt)+) => {{
        let (a, b) = ($a, $b);
        prop_assert!(close(a, b, $scale), "{} vs {}: {}", a, b, format!($($msg)+));
    }};
}

pub fn interval() -> impl Strategy<Value = Interval> {
    let range = prop_oneof![1 => Just(0.0), 4 => 0.0..20.0f64];
    (-50.0..50.0f64, range).prop_map(|(c, r)| Interval::from_center_range(c, r).unwrap())
}

/// Datasets with `n` in `3..=max_n` objects and `p` in `2..=max_p`
/// variables whose centers are not all equal.
pub fn dataset(max_n: usize, max_p: usize) -> impl Strategy<Value = IntervalDataset> {
    (3..=max_n, 2..=max_p)
        .prop_flat_map(|(n, p)| proptest::collection::vec(proptest::collection::vec(interval(), n), p))
        .prop_filter("constant centers", |cols| {
            cols.iter().all(|c| c.iter().any(|x| (x.center() - c[0].center()).abs() > 1e-3))
        })
        .prop_map(|cols| {
            let names = (1..=cols.len()).map(|j| format!("X{j}")).collect();
            IntervalDataset::from_columns(None, names, cols).unwrap()
        })
}

pub fn nonzero_weight() -> impl Strategy<Value = f64> {
    (0.1..5.0f64, any::<bool>()).prop_map(|(w, neg)| if neg { -w } else { w })
}

fn psd(p: usize) -> impl Strategy<Value = SymmetricMatrix> {
    proptest::collection::vec(-2.0..2.0f64, p * p).prop_map(move |a| {
        SymmetricMatrix::from_fn(p, |i, j| (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum())
    })
}

pub fn params(p: usize) -> impl Strategy<Value = PopulationParams> {
    (
        proptest::collection::vec(-5.0..5.0f64, p),
        psd(p),
        proptest::collection::vec(0.0..5.0f64, p),
        psd(p),
    )
        .prop_map(|(mu_c, scc, mu_r, srr)| PopulationParams::new(mu_c, scc, mu_r, srr, None).unwrap())
}

fn names(n: usize, prefix: &str) -> Vec<String> {
    (1..=n).map(|j| format!("{prefix}{j}")).collect()
}

fn scale_of(d: &IntervalDataset) -> f64 {
    d.rows()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.center().abs()).max(x.range()))
        .powi(2)
}

fn mean_r1r2(d: &IntervalDataset, j: usize, l: usize) -> f64 {
    d.ranges(j).zip(d.ranges(l)).map(|(a, b)| a * b).sum::<f64>() / d.n_objects() as f64
}

fn center_cov(d: &IntervalDataset, j: usize, l: usize) -> f64 {
    sample_cov_matrix(d, CovKind::K1).get(j, l)
}

/// Means are linear under affine maps and two-term combinations.
pub fn mean_linearity(d: &IntervalDataset, w1: f64, w2: f64, c: f64) -> Check {
    let p = d.n_variables();
    let mut row_a = vec![0.0; p];
    row_a[0] = w1;
    let mut row_b = vec![0.0; p];
    row_b[0] = w1;
    row_b[1] = w2;
    let t = transform_dataset(d, names(2, "Y"), &[row_a, row_b], Some(&[c, c])).unwrap();
    let m = sample_mean(d);
    let mt = sample_mean(&t);
    let s = scale_of(d).sqrt() * (w1.abs() + w2.abs() + 1.0) + c.abs();
    assert_close!(mt[0], w1 * m[0] + c, s, "affine mean");
    assert_close!(mt[1], w1 * m[0] + w2 * m[1] + c, s, "lincomb mean");
    let k = Interval::point(c);
    let consts = IntervalDataset::from_columns(None, vec!["k".into()], vec![vec![k; d.n_objects()]])
        .unwrap();
    assert_close!(sample_mean(&consts)[0], c, c.abs(), "mean of a constant");
    Ok(())
}

/// Nonnegativity, conventional collapse and the `w^2` scale law of the
/// symbolic variance, plus zero variance exactly for constants.
pub fn variance_laws(d: &IntervalDataset, w1: f64, w2: f64) -> Check {
    let p = d.n_variables();
    let mut row = vec![0.0; p];
    row[0] = w1;
    let t = transform_dataset(d, names(1, "Y"), &[row], Some(&[w2])).unwrap();
    let conventional = IntervalDataset::from_columns(
        None,
        vec!["c".into()],
        vec![d.column(0).map(|x| Interval::point(x.center())).collect()],
    )
    .unwrap();
    let s = scale_of(d) * w1 * w1;
    let v1 = sample_cov_matrix(&conventional, CovKind::K1).get(0, 0);
    for k in CovKind::ALL {
        let v = sample_cov_matrix(d, k).get(0, 0);
        prop_assert!(v >= 0.0, "{k}: negative variance {v}");
        prop_assert!(v > 0.0, "{k}: nonconstant column has zero variance");
        assert_close!(sample_cov_matrix(&t, k).get(0, 0), w1 * w1 * v, s, "{k} scale law");
        assert_close!(sample_cov_matrix(&conventional, k).get(0, 0), v1, s, "{k} collapse");
    }
    // constant center; zero range gives zero for every k, a positive range
    // only for k = 1
    let c = d.cell(0, 0).center();
    let r = d.cell(0, 0).range().max(1.0);
    let n = d.n_objects();
    let flat = IntervalDataset::from_columns(
        None,
        vec!["a".into(), "b".into()],
        vec![
            vec![Interval::point(c); n],
            vec![Interval::from_center_range(c, r).unwrap(); n],
        ],
    )
    .unwrap();
    for k in CovKind::ALL {
        let m = sample_cov_matrix(&flat, k);
        prop_assert!(m.get(0, 0).abs() <= 1e-20 * (1.0 + c * c), "{k}: constant has variance");
        if k == CovKind::K1 {
            prop_assert!(m.get(1, 1).abs() <= 1e-20 * (1.0 + c * c));
        } else {
            prop_assert!(m.get(1, 1) > 0.0, "{k}: nondegenerate constant-center column");
        }
    }
    Ok(())
}

/// Covariance identities on a sample, with `X1, X2, X3` the first three
/// columns (the third repeats the second when `p = 2`).
pub fn sample_covariance_laws(d: &IntervalDataset, w1: f64, w2: f64) -> Check {
    let p = d.n_variables();
    let x3 = if p > 2 { 2 } else { 1 };
    let e = |j: usize| {
        let mut v = vec![0.0; p];
        v[j] = 1.0;
        v
    };
    let comb = |a: &[(usize, f64)]| {
        let mut v = vec![0.0; p];
        for &(j, w) in a {
            v[j] += w;
        }
        v
    };
    let rows = vec![
        e(0),                            // 0: X1
        e(1),                            // 1: X2
        e(x3),                           // 2: X3
        e(0),                            // 3: copy of X1
        comb(&[(0, 1.0), (1, 1.0)]),     // 4: X1 + X2
        comb(&[(0, 1.0), (1, -1.0)]),    // 5: X1 - X2
        comb(&[(0, w1)]),                // 6: w1 X1
        comb(&[(1, w2)]),                // 7: w2 X2
        comb(&[(0, w1), (1, w2)]),       // 8: w1 X1 + w2 X2
        vec![0.0; p],                    // 9: the constant w1
    ];
    let mut offsets = vec![0.0; rows.len()];
    offsets[9] = w1;
    let t = transform_dataset(d, names(rows.len(), "T"), &rows, Some(&offsets)).unwrap();
    let e12 = mean_r1r2(d, 0, 1);
    let e11 = mean_r1r2(d, 0, 0);
    let cc12 = center_cov(d, 0, 1);
    let s = scale_of(d) * (1.0 + w1.abs() + w2.abs()).powi(2);
    for k in CovKind::ALL {
        let m = sample_cov_matrix(&t, k);
        let delta = k.delta();
        // Cov_k(X1, X1) against Var_k(X1)
        if k.is_full() {
            assert_close!(m.get(0, 3), m.get(0, 0), s, "{k} self-covariance");
        } else {
            assert_close!(m.get(0, 0) - m.get(0, 3), delta * e11, s, "{k} self-covariance");
        }
        prop_assert!(m.get(0, 9).abs() <= 1e-9 * (1.0 + s), "{k} constant");
        prop_assert_eq!(m.get(0, 1).to_bits(), sample_cov_matrix(&t, k).get(1, 0).to_bits());
        assert_close!(m.get(4, 2), m.get(0, 2) + m.get(1, 2), s, "{k} additivity");
        let expected = if k.is_full() {
            w1 * w2 * cc12 + delta * (w1 * w2).abs() * e12
        } else {
            w1 * w2 * m.get(0, 1)
        };
        assert_close!(m.get(6, 7), expected, s, "{k} scaled covariance");
        if w1 * w2 > 0.0 {
            assert_close!(m.get(6, 7), w1 * w2 * m.get(0, 1), s, "{k} same-sign scaling");
        }
        let mut expected = m.get(0, 0) + m.get(1, 1) + 2.0 * m.get(0, 1);
        if !k.is_full() {
            expected += 2.0 * delta * e12;
        }
        assert_close!(m.get(4, 4), expected, s, "{k} variance of sum");
        let cross = if k.is_full() { cc12 } else { m.get(0, 1) };
        let expected = m.get(0, 0) + m.get(1, 1) - 2.0 * cross + 2.0 * delta * e12;
        assert_close!(m.get(5, 5), expected, s, "{k} variance of difference");
        let expected = if k.is_full() {
            w1 * w1 * m.get(0, 0) + w2 * w2 * m.get(1, 1) + 2.0 * m.get(6, 7)
        } else {
            w1 * w1 * m.get(0, 0)
                + w2 * w2 * m.get(1, 1)
                + 2.0 * w1 * w2 * m.get(0, 1)
                + 2.0 * (w1 * w2).abs() * delta * e12
        };
        assert_close!(m.get(8, 8), expected, s, "{k} variance of combination");
    }
    // a conventional X1
    let conv = IntervalDataset::from_columns(
        None,
        vec!["c".into(), "x".into()],
        vec![
            d.column(0).map(|x| Interval::point(x.center())).collect(),
            d.column(1).collect(),
        ],
    )
    .unwrap();
    let base = sample_cov_matrix(&conv, CovKind::K1).get(0, 1);
    for k in CovKind::ALL {
        assert_close!(sample_cov_matrix(&conv, k).get(0, 1), base, s, "{k} conventional");
    }
    Ok(())
}

/// The same identities for population matrices, through the Moore image
/// of the parameters under a linear map.
pub fn population_covariance_laws(params: &PopulationParams, w1: f64, w2: f64) -> Check {
    let p = params.dim();
    assert!(p >= 3);
    let e = |j: usize, w: f64| {
        let mut v = vec![0.0; p];
        v[j] = w;
        v
    };
    let add = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let rows = vec![
        e(0, 1.0),
        e(1, 1.0),
        e(2, 1.0),
        e(0, 1.0),
        add(e(0, 1.0), e(1, 1.0)),
        add(e(0, 1.0), e(1, -1.0)),
        e(0, w1),
        e(1, w2),
        add(e(0, w1), e(1, w2)),
        vec![0.0; p],
    ];
    let t = params.linear_transform(&rows).unwrap();
    let err = symcov_core::expected_rr(params);
    let (e11, e12) = (err.get(0, 0), err.get(0, 1));
    let cc12 = params.sigma_cc().get(0, 1);
    let s = (0..p)
        .map(|j| params.sigma_cc().get(j, j) + err.get(j, j))
        .fold(1.0f64, f64::max)
        * (1.0 + w1.abs() + w2.abs()).powi(2);
    for k in CovKind::ALL {
        let m = population_cov_matrix(&t, k);
        let delta = k.delta();
        if k.is_full() {
            assert_close!(m.get(0, 3), m.get(0, 0), s, "{k} self-covariance");
        } else {
            assert_close!(m.get(0, 0) - m.get(0, 3), delta * e11, s, "{k} self-covariance");
        }
        prop_assert!(m.get(0, 9).abs() <= 1e-12 * s, "{k} constant");
        assert_close!(m.get(4, 2), m.get(0, 2) + m.get(1, 2), s, "{k} additivity");
        let expected = if k.is_full() {
            w1 * w2 * cc12 + delta * (w1 * w2).abs() * e12
        } else {
            w1 * w2 * m.get(0, 1)
        };
        assert_close!(m.get(6, 7), expected, s, "{k} scaled covariance");
        let mut expected = m.get(0, 0) + m.get(1, 1) + 2.0 * m.get(0, 1);
        if !k.is_full() {
            expected += 2.0 * delta * e12;
        }
        assert_close!(m.get(4, 4), expected, s, "{k} variance of sum");
        let cross = if k.is_full() { cc12 } else { m.get(0, 1) };
        let expected = m.get(0, 0) + m.get(1, 1) - 2.0 * cross + 2.0 * delta * e12;
        assert_close!(m.get(5, 5), expected, s, "{k} variance of difference");
        let expected = if k.is_full() {
            w1 * w1 * m.get(0, 0) + w2 * w2 * m.get(1, 1) + 2.0 * m.get(6, 7)
        } else {
            w1 * w1 * m.get(0, 0)
                + w2 * w2 * m.get(1, 1)
                + 2.0 * w1 * w2 * m.get(0, 1)
                + 2.0 * (w1 * w2).abs() * delta * e12
        };
        assert_close!(m.get(8, 8), expected, s, "{k} variance of combination");
    }
    // make X1 conventional
    let mut mu_r = params.mu_r().to_vec();
    mu_r[0] = 0.0;
    let srr = SymmetricMatrix::from_fn(p, |i, j| {
        if i == 0 || j == 0 {
            0.0
        } else {
            params.sigma_rr().get(i, j)
        }
    });
    let conv = PopulationParams::new(
        params.mu_c().to_vec(),
        params.sigma_cc().clone(),
        mu_r,
        srr,
        None,
    )
    .unwrap();
    for k in CovKind::ALL {
        assert_close!(population_cov_matrix(&conv, k).get(0, 1), cc12, s, "{k} conventional");
    }
    Ok(())
}

fn has_zero_diagonal(m: &SymmetricMatrix) -> bool {
    m.diag().iter().any(|v| *v <= 0.0)
}

/// `|Cor_k| <= 1` for every k, sample and population.
pub fn correlation_bounded(d: &IntervalDataset, params: &PopulationParams) -> Check {
    for k in CovKind::ALL {
        let r = sample_cor_matrix(d, k).unwrap();
        for v in r.to_rows().iter().flatten() {
            prop_assert!(v.abs() <= 1.0, "{k}: sample correlation {v}");
        }
        if !has_zero_diagonal(&population_cov_matrix(params, k)) {
            let r = population_cor_matrix(params, k).unwrap();
            for v in r.to_rows().iter().flatten() {
                prop_assert!(v.abs() <= 1.0, "{k}: population correlation {v}");
            }
        }
    }
    Ok(())
}

/// Self-correlation, the sign law and the `k = 2, 3` gap under a negative
/// scale factor.
pub fn correlation_laws(d: &IntervalDataset, w1: f64, w2: f64) -> Check {
    let p = d.n_variables();
    let mut row = vec![0.0; p];
    row[1] = w1;
    let rows = vec![
        {
            let mut v = vec![0.0; p];
            v[0] = 1.0;
            v
        },
        {
            let mut v = vec![0.0; p];
            v[0] = 1.0;
            v
        },
        {
            let mut v = vec![0.0; p];
            v[1] = 1.0;
            v
        },
        row,
    ];
    let t = transform_dataset(d, names(4, "T"), &rows, Some(&[0.0, 0.0, 0.0, w2])).unwrap();
    let has_range = d.ranges(0).any(|r| r > 0.0);
    let e12 = mean_r1r2(d, 0, 1);
    let s = scale_of(d) * (1.0 + w1.abs()).powi(2);
    for k in CovKind::ALL {
        let r = sample_cor_matrix(&t, k).unwrap();
        if k.is_full() {
            prop_assert!((r.get(0, 1) - 1.0).abs() < 1e-12, "{k}: self-correlation {}", r.get(0, 1));
        } else if has_range {
            prop_assert!(r.get(0, 1) < 1.0, "{k}: self-correlation {}", r.get(0, 1));
        } else {
            prop_assert!((r.get(0, 1) - 1.0).abs() < 1e-12, "{k}");
        }
        let (base, moved) = (r.get(0, 2), r.get(0, 3));
        let sgn = w1.signum();
        if !k.is_full() || k == CovKind::K1 {
            prop_assert!((moved - sgn * base).abs() < 1e-9, "{k}: sign law {moved} vs {base}");
        } else if w1 > 0.0 {
            prop_assert!((moved - base).abs() < 1e-9, "{k}: positive scale {moved} vs {base}");
        } else {
            let c = sample_cov_matrix(&t, k);
            let gap = c.get(0, 3) - w1 * c.get(0, 2);
            assert_close!(gap, 2.0 * k.delta() * w1.abs() * e12, s, "{k}: covariance gap");
            // differs from the negated correlation by 2 delta E(R1 R2) / sd
            let sd = (c.get(0, 0) * c.get(2, 2)).sqrt();
            let expected = 2.0 * k.delta() * e12 / sd;
            prop_assert!((moved + base - expected).abs() < 1e-9, "{k}: negated correlation");
        }
    }
    Ok(())
}
