mod common;

use approx::assert_abs_diff_eq;
use possal::pgp::Link;
use possal::possibility::{GridAxis, GridPossibility};
use possal::special::normal_cdf;
use possal::uncertainty::{
    maximize_scalar, nec_bin, nec_multi, u_l_bin, u_l_multi, u_theta_gaussian, u_theta_grid, u_y_discrete,
};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

/// Success-probability axis of a two-label multinomial: `p(1|t) = t`.
fn simplex_axis(step: f64) -> GridAxis<f64> {
    GridAxis::with_step(0.0, 1.0, step).unwrap()
}

fn simplex_likelihood(axis: &GridAxis<f64>) -> Vec<Vec<f64>> {
    let p1: Vec<f64> = (0..axis.len).map(|k| axis.point(k)).collect();
    vec![p1.iter().map(|p| 1.0 - p).collect(), p1]
}

/// Random possibility on the axis: a max of a few Gaussian bumps,
/// normalized to sup 1.
fn random_prior(r: &mut rand_chacha::ChaCha8Rng, axis: GridAxis<f64>) -> GridPossibility<f64> {
    let bumps: Vec<(f64, f64)> =
        (0..r.random_range(1..4)).map(|_| (r.random_range(0.0..1.0), r.random_range(0.01..0.3))).collect();
    GridPossibility::from_fn(vec![axis], |t: &[f64]| {
        bumps.iter().map(|(c, s)| (-0.5 * ((t[0] - c) / s).powi(2)).exp()).fold(0.0, f64::max)
    })
    .unwrap()
}

#[test]
fn a0_measures_are_non_negative() {
    let ax = simplex_axis(1e-3);
    let lik = simplex_likelihood(&ax);
    let mut r = common::rng(1);
    for _ in 0..50 {
        let f = random_prior(&mut r, ax);
        assert!(u_theta_grid(&f) >= 0.0);
        assert!(u_y_discrete(&f, &lik).unwrap() >= 0.0);
    }
}

#[test]
fn a1_indicator_prior_has_no_uncertainty() {
    let ax = simplex_axis(1e-3);
    let lik = simplex_likelihood(&ax);
    for flat in [0, 137, 500, 1000] {
        let f = GridPossibility::indicator(vec![ax], flat).unwrap();
        // one cell of width 1e-3
        assert!(u_theta_grid(&f) <= 1e-3 + 1e-15);
        assert_eq!(u_y_discrete(&f, &lik).unwrap(), 0.0);
    }
}

#[test]
fn a2_uninformative_prior_is_maximal() {
    let ax = simplex_axis(1e-3);
    let lik = simplex_likelihood(&ax);
    let flat = GridPossibility::uninformative(vec![ax]).unwrap();
    let (ut, uy) = (u_theta_grid(&flat), u_y_discrete(&flat, &lik).unwrap());
    assert_abs_diff_eq!(uy, 1.0, epsilon = 1e-12);
    let mut r = common::rng(2);
    for _ in 0..50 {
        let f = random_prior(&mut r, ax);
        assert!(u_theta_grid(&f) <= ut);
        assert!(u_y_discrete(&f, &lik).unwrap() <= uy);
    }
}

#[test]
fn a4_larger_priors_are_more_uncertain() {
    let ax = simplex_axis(1e-3);
    let lik = simplex_likelihood(&ax);
    let mut r = common::rng(3);
    for _ in 0..50 {
        let f = random_prior(&mut r, ax);
        let other = random_prior(&mut r, ax);
        let values: Vec<f64> = f.values().iter().zip(other.values()).map(|(a, b)| a.max(*b)).collect();
        let g = GridPossibility::new(vec![ax], values).unwrap();
        assert!(u_y_discrete(&g, &lik).unwrap() >= u_y_discrete(&f, &lik).unwrap());
        if g.values() != f.values() {
            assert!(u_theta_grid(&g) > u_theta_grid(&f));
        }
    }
}

/// `f` pushed through `T(t) = alpha t + (1 - alpha) c`, tabulated on the
/// same axis.
fn pushed(ax: GridAxis<f64>, f: impl Fn(f64) -> f64, alpha: f64, c: f64) -> GridPossibility<f64> {
    GridPossibility::from_fn(vec![ax], |t: &[f64]| {
        let pre = (t[0] - (1.0 - alpha) * c) / alpha;
        if (0.0..=1.0).contains(&pre) {
            f(pre)
        } else {
            0.0
        }
    })
    .unwrap()
}

#[test]
fn a3_multinomial_scaling() {
    let ax = simplex_axis(1e-5);
    let lik = simplex_likelihood(&ax);
    for (alpha, c) in [(0.6, 0.5), (0.3, 0.2), (0.9, 0.8)] {
        for (center, sd) in [(0.4, 0.05), (0.55, 0.08)] {
            let f = |t: f64| (-0.5 * ((t - center) / sd).powi(2)).exp();
            let base = GridPossibility::from_fn(vec![ax], |t: &[f64]| f(t[0])).unwrap();
            let image = pushed(ax, f, alpha, c);
            assert_abs_diff_eq!(u_theta_grid(&image), alpha * u_theta_grid(&base), epsilon = 1e-6);
        }
        // the label measure scales once the sup sits at the mode
        let f = |t: f64| (-0.5 * ((t - 0.4) / 0.005).powi(2)).exp();
        let base = GridPossibility::from_fn(vec![ax], |t: &[f64]| f(t[0])).unwrap();
        let image = pushed(ax, f, alpha, c);
        let (uy, uy_image) = (u_y_discrete(&base, &lik).unwrap(), u_y_discrete(&image, &lik).unwrap());
        assert_abs_diff_eq!(uy_image, alpha * uy, epsilon = 1e-4);
    }
}

#[test]
fn u_theta_closed_forms() {
    assert_abs_diff_eq!(u_theta_gaussian(0.3, 1.0).unwrap(), (2.0 * PI).sqrt(), epsilon = 1e-6);
    assert_abs_diff_eq!(u_theta_gaussian(-5.0, 4.0).unwrap(), 2.0 * (2.0 * PI).sqrt(), epsilon = 1e-12);
    for var in [1.0, 4.0] {
        let h = 1e-4;
        let n = (20.0 / h) as usize;
        let vals: Vec<f64> = (0..=n).map(|k| (-0.5 * (-10.0 + k as f64 * h).powi(2) / var).exp()).collect();
        let trap = h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[n]));
        // the window truncates the var = 4 tail at 5 sigma
        let tail = if var > 1.0 { 2e-5 } else { 1e-6 };
        assert_abs_diff_eq!(u_theta_gaussian(0.0, var).unwrap(), trap, epsilon = tail);
    }
    assert!(u_theta_gaussian(0.0, 1e-300).unwrap() < 1e-149);
    assert!(u_theta_gaussian(0.0, 0.0).is_err());
}

fn probit_u_oracle(mu: f64, var: f64) -> (f64, f64) {
    let sd = var.sqrt();
    let (lo, h) = (mu - 10.0 * sd, 1e-5 * sd);
    let phi = common::phi_table(lo, h, 2_000_000);
    let (mut pos, mut neg) = ((lo, f64::MIN), f64::MIN);
    for (k, p) in phi.iter().enumerate() {
        let g = lo + k as f64 * h;
        let prior = (-0.5 * (g - mu).powi(2) / var).exp();
        if prior * p > pos.1 {
            pos = (g, prior * p);
        }
        neg = neg.max(prior * (1.0 - p));
    }
    (pos.1 + neg - 1.0, pos.0)
}

#[test]
fn u_l_bin_closed_value() {
    let u = u_l_bin(0.0, 1.0, Link::Probit).unwrap();
    let (oracle, argmax) = probit_u_oracle(0.0, 1.0);
    assert_abs_diff_eq!(u, oracle, epsilon = 1e-8);
    assert_abs_diff_eq!(argmax, 0.506, epsilon = 1e-3);
    assert_abs_diff_eq!(u, 0.221, epsilon = 1e-3);
    let s = maximize_scalar(|t: f64| (-0.5 * t * t).exp() * normal_cdf(t), -10.0, 10.0).unwrap();
    assert_abs_diff_eq!(u, 2.0 * s.max - 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(s.argmax, argmax, epsilon = 1e-4);
}

#[test]
fn u_l_bin_against_grid_oracle() {
    for (mu, var) in [(0.7, 0.5), (-1.5, 2.0), (3.0, 1.0), (0.0, 100.0)] {
        let (oracle, _) = probit_u_oracle(mu, var);
        assert_abs_diff_eq!(u_l_bin(mu, var, Link::Probit).unwrap(), oracle, epsilon = 1e-8);
    }
    assert!(u_l_bin(0.0, 100.0, Link::Probit).unwrap() > 0.9);
    for mu in [-3.0, 0.0, 2.0] {
        assert!(u_l_bin(mu, 1e-12, Link::Logistic).unwrap() < 1e-5);
    }
}

#[test]
fn discrete_label_measure_matches_latent_measure() {
    for (mu, var) in [(0.0, 1.0), (0.8, 0.6), (-1.2, 2.5)] {
        let sd: f64 = f64::sqrt(var);
        let ax = GridAxis::with_step(mu - 8.0 * sd, mu + 8.0 * sd, 1e-3 * sd).unwrap();
        let prior = GridPossibility::from_fn(vec![ax], |t: &[f64]| (-0.5 * (t[0] - mu).powi(2) / var).exp()).unwrap();
        let p1: Vec<f64> = (0..ax.len).map(|k| normal_cdf(ax.point(k))).collect();
        let lik = vec![p1.iter().map(|p| 1.0 - p).collect(), p1];
        let uy = u_y_discrete(&prior, &lik).unwrap();
        assert_abs_diff_eq!(uy, u_l_bin(mu, var, Link::Probit).unwrap(), epsilon = 1e-3);
        if mu == 0.0 {
            assert_abs_diff_eq!(uy, 0.221, epsilon = 1e-3);
        }
    }
    let ax = simplex_axis(0.1);
    let mut bad = simplex_likelihood(&ax);
    bad[0][3] += 0.01;
    assert!(u_y_discrete(&GridPossibility::uninformative(vec![ax]).unwrap(), &bad).is_err());
}

#[test]
fn necessity_closed_forms_match_grid_sups() {
    // binary: 1 - sup of the latent possibility over the wrong side of 0
    for (mu, var) in [(1.0, 1.0), (-2.0, 4.0), (0.3, 0.2), (2.5, 0.7)] {
        let sd = f64::sqrt(var);
        let wrong = if mu > 0.0 { (mu - 10.0 * sd, 0.0) } else { (0.0, mu + 10.0 * sd) };
        let (_, sup) = common::grid_max(|t| (-0.5 * (t - mu).powi(2) / var).exp(), wrong.0, wrong.1, 1e-4);
        assert_abs_diff_eq!(nec_bin(mu, var), 1.0 - sup, epsilon = 1e-4);
    }
    assert_eq!(nec_bin(1.0, 1.0), 1.0 - (-0.5f64).exp());
    assert_eq!(nec_bin(-2.0, 4.0), nec_bin(1.0, 1.0));
    assert_eq!(nec_bin(0.0, 3.0), 0.0);

    let cases: [(&[f64], &[f64]); 3] = [
        (&[3.0, 1.0, 0.0], &[1.0, 1.0, 1.0]),
        (&[0.2, -1.0, 1.5, 0.9], &[0.5, 2.0, 0.3, 1.2]),
        (&[-1.0, 2.0], &[3.0, 0.1]),
    ];
    for (mu, var) in cases {
        let nm = nec_multi(mu, var).unwrap();
        let top = nm.top;
        let worst = (0..mu.len())
            .filter(|&l| l != top)
            .map(|l| {
                let prod =
                    |t: f64| (-0.5 * (t - mu[l]).powi(2) / var[l] - 0.5 * (t - mu[top]).powi(2) / var[top]).exp();
                common::grid_max(prod, -10.0, 10.0, 1e-4).1
            })
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(nm.value, 1.0 - worst, epsilon = 1e-4);
    }
    let nm = nec_multi(&[3.0, 1.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
    assert_abs_diff_eq!(nm.value, 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
    assert_abs_diff_eq!(nm.value, 0.63212, epsilon = 1e-5);
}

#[test]
fn necessity_limits() {
    let nm = nec_multi(&[3.0, 1.0, 0.0], &[1e-12; 3]).unwrap();
    assert_abs_diff_eq!(nm.value, 1.0, epsilon = 1e-12);
    let tie = nec_multi(&[2.0, 2.0, 0.0], &[1.0; 3]).unwrap();
    assert!(tie.degenerate);
    assert_eq!(tie.value, 0.0);
    let close = nec_multi(&[2.0, 2.0 - 1e-9, 0.0], &[1.0; 3]).unwrap();
    assert!(!close.degenerate && close.value < 1e-15);
}

#[test]
fn one_minus_necessity_behaves_like_an_uncertainty() {
    let mus = [-2.0, -0.4, 0.7, 3.0];
    // strictness is checked where 1 - exp(-mu^2 / 2 var) resolves in f64
    let vars: Vec<f64> = (0..60).map(|k| 10f64.powf(-0.5 + 0.1 * k as f64)).collect();
    for &mu in &mus {
        let unc: Vec<f64> = vars.iter().map(|&v| 1.0 - nec_bin(mu, v)).collect();
        assert!(unc.iter().all(|u| (0.0..=1.0).contains(u)));
        assert!(unc.windows(2).all(|w| w[1] > w[0]));
        assert!(1.0 - nec_bin(mu, 1e-6) < 1e-12);
        assert!(1.0 - nec_bin(mu, 1e12) > 1.0 - 1e-10);
    }
    let mu = [3.0, 1.0, 0.0];
    let mut prev = 0.0;
    for &v in &vars {
        let u = 1.0 - nec_multi(&mu, &[v, v, v]).unwrap().value;
        assert!((0.0..=1.0).contains(&u) && u >= prev);
        prev = u;
    }
    assert!(1.0 - nec_multi(&mu, &[1e-8; 3]).unwrap().value < 1e-12);
    assert!(1.0 - nec_multi(&mu, &[1e12; 3]).unwrap().value > 1.0 - 1e-10);
    // class 2 is not the critical competitor of class 0
    let base = nec_multi(&mu, &[1.0, 1.0, 1.0]).unwrap().value;
    assert_eq!(nec_multi(&mu, &[1.0, 1.0, 1.5]).unwrap().value, base);
}

#[test]
fn uncertainty_and_necessity_move_in_opposite_directions() {
    let vars: Vec<f64> = (1..80).map(|k| 0.05 * k as f64).collect();
    for mu in [0.5, -1.0, 2.0] {
        for link in [Link::Logistic, Link::Probit] {
            let u: Vec<f64> = vars.iter().map(|&v| u_l_bin(mu, v, link).unwrap()).collect();
            assert!(u.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        }
        let n: Vec<f64> = vars.iter().map(|&v| nec_bin(mu, v)).collect();
        assert!(n.windows(2).all(|w| w[1] < w[0]));
    }
}

/// Log of the per-label supremum by a coarse grid followed by a local
/// refinement, for three classes.
fn multi_label_sup_oracle(mu: &[f64; 3], var: &[f64; 3], label: usize) -> f64 {
    let obj = |t: [f64; 3]| {
        let lse = t.iter().map(|v| v.exp()).sum::<f64>().ln();
        t[label] - lse - (0..3).map(|k| (t[k] - mu[k]).powi(2) / (2.0 * var[k])).sum::<f64>()
    };
    let mut best = ([0.0; 3], f64::MIN);
    let mut center = *mu;
    let mut half: Vec<f64> = var.iter().map(|v| v + 4.0 * v.sqrt()).collect();
    for _ in 0..8 {
        let steps = 40;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let t = [
                        center[0] + half[0] * (2.0 * i as f64 / steps as f64 - 1.0),
                        center[1] + half[1] * (2.0 * j as f64 / steps as f64 - 1.0),
                        center[2] + half[2] * (2.0 * k as f64 / steps as f64 - 1.0),
                    ];
                    let v = obj(t);
                    if v > best.1 {
                        best = (t, v);
                    }
                }
            }
        }
        center = best.0;
        half.iter_mut().for_each(|h| *h *= 0.15);
    }
    best.1
}

#[test]
fn u_l_multi_against_grid_oracle() {
    let cases =
        [([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), ([1.0, -0.5, 0.3], [0.5, 2.0, 1.2]), ([2.0, 0.0, -2.0], [0.3, 0.3, 3.0])];
    for (mu, var) in cases {
        let oracle: f64 = (0..3).map(|l| multi_label_sup_oracle(&mu, &var, l).exp()).sum::<f64>() - 1.0;
        assert_abs_diff_eq!(u_l_multi(&mu, &var).unwrap(), oracle, epsilon = 1e-6);
    }
    // permutation symmetry of the symmetric case
    let sups: Vec<f64> = (0..3).map(|l| multi_label_sup_oracle(&[0.0; 3], &[1.0; 3], l)).collect();
    assert_abs_diff_eq!(sups[0], sups[1], epsilon = 1e-9);
    assert_abs_diff_eq!(sups[1], sups[2], epsilon = 1e-9);
    let u = u_l_multi(&[0.0; 3], &[1.0; 3]).unwrap();
    assert_abs_diff_eq!(u, 3.0 * sups[0].exp() - 1.0, epsilon = 1e-6);
}

#[test]
fn u_l_multi_limits() {
    assert!(u_l_multi(&[1.0, -1.0, 0.5], &[1e-12; 3]).unwrap() < 1e-5);
    for (m, s2) in [(0.0, 1.0), (1.2, 0.5), (-2.0, 3.0)] {
        let multi = u_l_multi(&[m, 0.0], &[s2, 1e-12]).unwrap();
        assert_abs_diff_eq!(multi, u_l_bin(m, s2, Link::Logistic).unwrap(), epsilon = 1e-6);
    }
    let wide = u_l_multi(&[0.0; 4], &[1e4; 4]).unwrap();
    assert!(wide > 2.5 && wide <= 3.0);
}

proptest! {
    #[test]
    fn binary_measures_are_bounded(mu in -20.0f64..20.0, var in 1e-6f64..1e3) {
        for link in [Link::Logistic, Link::Probit] {
            let u = u_l_bin(mu, var, link).unwrap();
            prop_assert!((0.0..=1.0).contains(&u));
        }
        let n = nec_bin(mu, var);
        prop_assert!((0.0..=1.0).contains(&n));
    }

    #[test]
    fn multiclass_measures_are_bounded(
        mu in prop::collection::vec(-5.0f64..5.0, 2..5),
        scale in 1e-3f64..10.0,
    ) {
        let var: Vec<f64> = mu.iter().enumerate().map(|(i, _)| scale * (1.0 + i as f64)).collect();
        let u = u_l_multi(&mu, &var).unwrap();
        prop_assert!(u >= 0.0 && u <= (mu.len() - 1) as f64);
        let n = nec_multi(&mu, &var).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&n));
        let inflated: Vec<f64> = var.iter().map(|v| 2.0 * v).collect();
        prop_assert!(nec_multi(&mu, &inflated).unwrap().value <= n);
    }
}
