use proptest::prelude::*;

use itfmap_core::cfld;
use itfmap_core::norms::{exponents, lp_norm, triple_integral, x_norm_upper, xstar_norm, Rational};
use itfmap_core::profiles::{random_field, rng_for};
use itfmap_core::reconstruct::scattering_vectors;
use itfmap_core::resolvent::{apply_resolvent, helmholtz_operator, ResolventConfig};
use itfmap_core::{Complex64, Field, Grid, LatticeVector, Rep, Stepper};

fn grid2(points: usize, length: f64) -> Grid {
    Grid::new(2, points, length).unwrap()
}

fn noise(grid: &Grid, seed: u64) -> Field {
    random_field(grid, &mut rng_for(seed, 0))
}

fn real_noise(grid: &Grid, seed: u64) -> Field {
    noise(grid, seed).map(|z| Complex64::new(z.re, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), points in prop::sample::select(vec![16usize, 32, 64]), length in 0.5f64..50.0) {
        let g = grid2(points, length);
        let f = noise(&g, seed);
        let back = f.to_spectral().unwrap().to_spatial().unwrap();
        prop_assert!(back.max_diff(&f).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn parseval(seed in any::<u64>(), length in 0.5f64..50.0, dim in 2usize..=3) {
        let g = Grid::new(dim, 16, length).unwrap();
        let f = noise(&g, seed);
        let spatial = f.l2();
        let spectral = f.to_spectral().unwrap().l2();
        prop_assert!((spatial - spectral).abs() <= 1e-12 * spatial);
    }

    #[test]
    fn real_fields_have_hermitian_spectra(seed in any::<u64>()) {
        let g = grid2(32, 7.0);
        let spec = real_noise(&g, seed).to_spectral().unwrap();
        for i in 0..g.len() {
            if g.is_nyquist(i) {
                continue;
            }
            let j = g.slot_of(&g.lattice_at(i).neg()).unwrap();
            prop_assert!((spec.values()[j] - spec.values()[i].conj()).norm() <= 1e-12 * spec.max_abs());
        }
    }

    #[test]
    fn resolvent_inverts_helmholtz_off_nyquist(seed in any::<u64>(), lambda in 0.5f64..10.0) {
        let g = grid2(32, 2.0 * std::f64::consts::PI);
        let f = noise(&g, seed).without_nyquist();
        let cfg = ResolventConfig::new(&g, lambda).unwrap();
        let back = helmholtz_operator(&apply_resolvent(&f, &cfg).unwrap(), lambda, cfg.epsilon());
        prop_assert!(back.sub(&f).unwrap().l2() <= 1e-10 * f.l2());
    }

    #[test]
    fn holder_chain(seed in any::<u64>(), num in 9i64..=12) {
        // q in (1, 3/2]: 1/q + 2/p = 1 bounds the triple integral.
        let t = exponents(2, Rational::new(num, 8)).unwrap();
        let g = grid2(32, 3.0);
        let v = noise(&g, seed);
        let u = random_field(&g, &mut rng_for(seed, 1));
        let w = random_field(&g, &mut rng_for(seed, 2));
        let lhs = triple_integral(&v, &u, &w).unwrap().norm();
        let (qf, pf) = (t.q.to_f64(), t.p.to_f64());
        let rhs = lp_norm(&v, qf).unwrap() * lp_norm(&u, pf).unwrap() * lp_norm(&w, pf).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn duality_sandwich(seed in any::<u64>(), lambda in 0.1f64..100.0, levels in 1usize..6) {
        let g = Grid::new(3, 16, 2.0).unwrap();
        let f = noise(&g, seed);
        let h = random_field(&g, &mut rng_for(seed, 1));
        let pairing = f.inner(&h).unwrap().norm();
        let bound = x_norm_upper(&f, lambda, 3, levels).unwrap() * xstar_norm(&h, lambda, 3).unwrap();
        prop_assert!(pairing <= bound * (1.0 + 1e-12));
        // More thresholds never make the bound worse.
        prop_assert!(x_norm_upper(&f, lambda, 3, levels + 1).unwrap() <= x_norm_upper(&f, lambda, 3, levels).unwrap());
    }

    #[test]
    fn scattering_algebra(a in -10i64..=10, b in -10i64..=10, m in 1i64..12) {
        prop_assume!(a != 0 || b != 0);
        let g = grid2(128, 9.0);
        let xi = LatticeVector::new(&[2 * a, 2 * b]);
        let c = scattering_vectors(&xi, m, &g).unwrap();
        prop_assert_eq!(c.k1.add(&c.k2.neg()), xi);
        prop_assert_eq!(c.k1.norm_sq(), c.k2.norm_sq());
        prop_assert_eq!(c.nu.dot(&xi), 0);
        let dk = g.freq_step();
        for (omega, k) in [(c.omega1, c.k1), (c.omega2, c.k2)] {
            let norm: f64 = omega.iter().map(|o| o * o).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
            for (o, kj) in omega.iter().zip(&k.0).take(2) {
                prop_assert!((c.lambda * o - *kj as f64 * dk).abs() <= 1e-12 * c.lambda);
            }
        }
        prop_assert!(c.mu >= m as f64 * dk - 1e-12);
    }

    #[test]
    fn exponent_relations(n in 2usize..=3, num in 1i64..40, den in 1i64..12) {
        let q = Rational::new(num, den);
        let admissible = if n == 2 { q > Rational::from_integer(1) } else { q >= Rational::new(3, 2) };
        let Ok(t) = exponents(n, q) else {
            prop_assert!(!admissible);
            return Ok(());
        };
        prop_assert!(admissible);
        let one = Rational::from_integer(1);
        prop_assert_eq!(t.q.recip() + t.p.recip() * 2, one);
        prop_assert_eq!(t.r.recip() * 2 + t.p.recip() * n as i64, Rational::new(n as i64, 2));
        prop_assert_eq!(t.q.dual().dual(), t.q);
        // q is clamped to at most (n+1)/2.
        prop_assert!(t.q.recip() >= Rational::new(2, n as i64 + 1));
        prop_assert_eq!(t.clamped, q > Rational::new(n as i64 + 1, 2));
    }

    #[test]
    fn unstep_inverts_step(seed in any::<u64>(), tau in 1e-4f64..0.1) {
        let g = grid2(32, 5.0);
        let v = real_noise(&g, seed);
        let s = Stepper::new(&v, tau).unwrap();
        let f = random_field(&g, &mut rng_for(seed, 3));
        let mut u = f.clone();
        s.step(&mut u);
        s.unstep(&mut u);
        prop_assert!(u.max_diff(&f).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn cfld_round_trip(seed in any::<u64>(), spectral in any::<bool>(), dim in 2usize..=3) {
        let g = Grid::new(dim, 16, 1.5).unwrap();
        let f = noise(&g, seed).in_rep(if spectral { Rep::Spectral } else { Rep::Spatial });
        let mut buf = Vec::new();
        cfld::write_to(&f, &mut buf).unwrap();
        let back = cfld::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.rep(), f.rep());
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.values(), f.values());
    }
}
