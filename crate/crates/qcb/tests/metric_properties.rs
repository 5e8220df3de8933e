mod common;

use qcb::metrics::{circle_basis_at, mk_distance, Budget, CircleLipschitz};

fn arc(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

fn dist(deg: usize, a: f64, b: f64) -> f64 {
    let l = CircleLipschitz::new(deg, 512, 1 << 14);
    mk_distance(&circle_basis_at(deg, a), &circle_basis_at(deg, b), &l, Budget::default(), 11).unwrap().bound
}

#[test]
fn circle_distance_sits_below_lp_and_arc_length() {
    for (a, b) in [(0.0, 1.0), (0.3, 2.5), (1.0, 4.0)] {
        let lp = common::circle_lp(8, a, b);
        let d = dist(8, a, b);
        assert!(d <= lp + 1e-9, "{d} > LP {lp}");
        assert!(d >= 0.98 * lp, "{d} vs LP {lp}");
        assert!(d <= arc(a, b) + 1e-9);
    }
}

#[test]
fn symmetric_and_triangle_within_gap() {
    let pts = [0.0, 0.9, 2.2, 4.0];
    let deg = 6;
    let mut d = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                d[i][j] = dist(deg, pts[i], pts[j]);
            }
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            assert!((d[i][j] - d[j][i]).abs() < 2e-3 * d[i][j].max(1e-12), "{i}{j}");
            for k in 0..4 {
                assert!(d[i][k] <= d[i][j] + d[j][k] + 4e-3, "{i}{j}{k}");
            }
        }
    }
}

#[test]
fn monotone_in_degree() {
    let degs = [2, 4, 8, 12];
    let ds: Vec<f64> = degs.iter().map(|&n| dist(n, 0.0, 2.0)).collect();
    let lps: Vec<f64> = degs.iter().map(|&n| common::circle_lp(n, 0.0, 2.0)).collect();
    for i in 0..degs.len() {
        // certified bounds sit below the optimum at every larger degree
        for j in i..degs.len() {
            assert!(ds[i] <= lps[j] + 1e-9, "{ds:?} {lps:?}");
        }
        if i > 0 {
            assert!(ds[i] >= ds[i - 1] * (1.0 - 5e-3), "{ds:?}");
        }
    }
    assert!(ds[3] <= 2.0 + 1e-9);
}
