use super::*;
use crate::circuit::{DiagonalGate, GateDensity, GeneratorSpec, Stage};
use crate::oracle::{statevector, statevector_from};
use crate::phasepoly::Var;
use crate::rng::SplitMix64;
use proptest::prelude::*;

fn cfg1() -> EngineConfig {
    EngineConfig::single_threaded()
}

fn empty(k: u32) -> Circuit {
    GeneratorSpec::new(k, 0)
        .with_density(GateDensity::empty())
        .build()
        .unwrap()
}

fn assert_matches_oracle(c: &Circuit, cfg: &EngineConfig) {
    let sim = Simulator::new(c).unwrap();
    let dense = statevector(c).unwrap();
    for idx in 0..1u128 << c.n() {
        let y = BitString::from_u128(c.n(), idx);
        let got = sim.amplitude(&y, cfg).unwrap().amplitude.to_f64();
        let want = dense.amplitude(&y).unwrap();
        assert!(
            (got - want).abs() < 1e-12,
            "y = {y}: engine {got}, oracle {want}"
        );
    }
}

#[test]
fn clifford_examples() {
    let z = BitVector::zeros(2);
    assert_eq!(
        clifford_amplitude(&BitMatrix::zeros(2, 2), &z, &z),
        DyadicAmplitude::ONE
    );
    let id = BitMatrix::identity(2);
    let a = clifford_amplitude(
        &id,
        &BitVector::from_word(2, 0b01),
        &BitVector::from_word(2, 0b10),
    );
    assert_eq!(a, DyadicAmplitude::new(1, 2));
    let ones = BitMatrix::from_rows(&[&[1, 1], &[1, 1]]);
    for db in 0..4 {
        let a = clifford_amplitude(
            &ones,
            &BitVector::from_word(2, 0b01),
            &BitVector::from_word(2, db),
        );
        assert!(a.is_zero());
    }
}

#[test]
fn clifford_matches_brute_force() {
    let mut rng = SplitMix64::new(31);
    for _ in 0..200 {
        let (rows, cols) = (1 + rng.below(4) as usize, 1 + rng.below(4) as usize);
        let mut m = BitMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, rng.bit());
            }
        }
        let dg = BitVector::from_word(rows, rng.next_u64() & ((1 << rows) - 1));
        let db = BitVector::from_word(cols, rng.next_u64() & ((1 << cols) - 1));
        let mut sum = 0i64;
        for u in 0..1u64 << rows {
            for v in 0..1u64 << cols {
                let uv = BitVector::from_word(rows, u);
                let vv = BitVector::from_word(cols, v);
                let p = m.mul_vec(&vv).unwrap().dot(&uv) ^ dg.dot(&uv) ^ db.dot(&vv);
                sum += if p { -1 } else { 1 };
            }
        }
        let want = sum as f64 / (1u64 << (rows + cols)) as f64;
        assert_eq!(clifford_amplitude(&m, &dg, &db).to_f64(), want);
    }
}

#[test]
fn empty_circuit_is_identity() {
    let sim = Simulator::new(&empty(1)).unwrap();
    let r = sim.amplitude(&BitString::zeros(6), &cfg1()).unwrap();
    assert_eq!(r.amplitude, DyadicAmplitude::ONE);
    let r = sim.amplitude(&BitString::from_u128(6, 5), &cfg1()).unwrap();
    assert!(r.amplitude.is_zero());
}

#[test]
fn single_ccz_three_quarters() {
    let mut c = empty(1);
    c.stages[0] = Stage::Diagonal(vec![DiagonalGate::ccz(0)]);
    let sim = Simulator::new(&c).unwrap();
    let r = sim.amplitude(&BitString::zeros(6), &cfg1()).unwrap();
    assert_eq!(r.amplitude, DyadicAmplitude::new(3, 2));
    assert_eq!(r.amplitude.to_string(), "3/2^2");
    assert_eq!(r.total_patterns, 4);
    assert_eq!(r.discarded_by_quickcheck + r.evaluated, 4);
}

#[test]
fn exhaustive_k1() {
    for seed in 0..12 {
        let density = if seed % 2 == 0 {
            GateDensity::default()
        } else {
            GateDensity::independent()
        };
        let c = GeneratorSpec::new(1, seed)
            .with_extra_layers(seed as usize % 3)
            .with_density(density)
            .build()
            .unwrap();
        assert_matches_oracle(&c, &cfg1());
        assert_matches_oracle(&c, &cfg1().with_quickcheck(QuickCheckMode::Off));
    }
}

#[test]
fn exhaustive_k2() {
    for seed in [3, 14, 15] {
        let c = GeneratorSpec::new(2, seed).build().unwrap();
        assert_matches_oracle(&c, &cfg1());
    }
    let c = GeneratorSpec::new(2, 92)
        .with_density(GateDensity::independent())
        .with_extra_layers(2)
        .build()
        .unwrap();
    assert_matches_oracle(&c, &cfg1());
}

#[test]
fn normalization_is_exact() {
    for seed in 0..4 {
        let c = GeneratorSpec::new(1, seed)
            .with_extra_layers(1)
            .build()
            .unwrap();
        let sim = Simulator::new(&c).unwrap();
        let total = (0..64u128).fold(DyadicProbability::zero(), |acc, y| {
            let a = sim
                .amplitude(&BitString::from_u128(6, y), &cfg1())
                .unwrap()
                .amplitude;
            acc.add(&a.probability())
        });
        assert_eq!(total, DyadicProbability::one());
    }
}

#[test]
fn schedule_independence() {
    let c = GeneratorSpec::new(3, 8)
        .with_extra_layers(2)
        .build()
        .unwrap();
    let sim = Simulator::new(&c).unwrap();
    let mut rng = SplitMix64::new(2);
    for _ in 0..4 {
        let y = BitString::from_bools(&(0..24).map(|_| rng.bit()).collect::<Vec<_>>());
        let base = sim.amplitude(&y, &cfg1()).unwrap();
        for threads in [1, 2, 8] {
            for gran in [1, 3, 64, 1000] {
                let cfg = EngineConfig {
                    threads,
                    shard_granularity: gran,
                    ..EngineConfig::default()
                };
                let r = sim.amplitude(&y, &cfg).unwrap();
                assert_eq!(r.amplitude, base.amplitude);
                assert_eq!(r.nonzero_contributions, base.nonzero_contributions);
                assert_eq!(r.discarded_by_quickcheck, base.discarded_by_quickcheck);
                assert_eq!(r.threads, threads);
            }
        }
    }
}

#[test]
fn quick_check_examples() {
    let x0 = BitVector::zeros(4);
    let all = BitVector::from_word(4, 0xf);
    assert!(!quick_check(&x0, &all, &all));
    assert!(quick_check(
        &BitVector::from_word(4, 0b11),
        &BitVector::from_word(4, 0b01),
        &x0
    ));
    assert!(!quick_check(
        &BitVector::from_word(4, 0b11),
        &BitVector::from_word(4, 0b11),
        &x0
    ));
}

#[test]
fn quick_check_only_discards_zero_terms() {
    for seed in 0..10 {
        let c = GeneratorSpec::new(2, seed).build().unwrap();
        let sim = Simulator::new(&c).unwrap();
        let s = sim.sliced();
        assert!(s.symmetry_holds_exactly());
        let mut rng = SplitMix64::new(seed);
        for _ in 0..8 {
            let y = [0, 1, 2].map(|_| rng.next_u64() & 0xf);
            for x in 0..16u64 {
                let xr = BitVector::from_word(4, x);
                let (dg, db) = s.deltas_at(&xr);
                let dgy = BitVector::from_word(4, dg.word() ^ y[1]);
                let dby = BitVector::from_word(4, db.word() ^ y[2]);
                if quick_check(&xr, &dgy, &dby) {
                    assert!(clifford_amplitude(&s.gamma_at(&xr), &dgy, &dby).is_zero());
                }
            }
        }
    }
}

#[test]
fn quick_check_neutral_when_symmetric() {
    for k in 1..=3 {
        for seed in 0..4 {
            let c = GeneratorSpec::new(k, seed)
                .with_extra_layers(seed as usize)
                .build()
                .unwrap();
            let sim = Simulator::new(&c).unwrap();
            if !sim.sliced().validate_symmetry(64, seed) || !sim.sliced().has_cubic_terms() {
                continue;
            }
            let mut rng = SplitMix64::new(seed + 100);
            for _ in 0..8 {
                let y = BitString::from_bools(&(0..c.n()).map(|_| rng.bit()).collect::<Vec<_>>());
                let on = sim
                    .amplitude(&y, &cfg1().with_quickcheck(QuickCheckMode::On))
                    .unwrap();
                let off = sim
                    .amplitude(&y, &cfg1().with_quickcheck(QuickCheckMode::Off))
                    .unwrap();
                assert_eq!(on.amplitude, off.amplitude);
                assert!(on.quickcheck_used && !off.quickcheck_used);
                assert_eq!(off.discarded_by_quickcheck, 0);
            }
        }
    }
}

#[test]
fn auto_mode_declines_asymmetric_instances() {
    let mut declined = 0;
    for seed in 0..10 {
        let c = GeneratorSpec::new(2, seed)
            .with_density(GateDensity::independent())
            .build()
            .unwrap();
        let sim = Simulator::new(&c).unwrap();
        let r = sim.amplitude(&BitString::zeros(12), &cfg1()).unwrap();
        assert_eq!(r.quickcheck_used, sim.sliced().symmetry_holds_exactly());
        declined += usize::from(!r.quickcheck_used);
    }
    assert!(declined > 0);
}

#[test]
fn quick_check_on_requires_square_registers() {
    let c = GeneratorSpec::new(1, 3).build().unwrap();
    let sim = Simulator::new(&c).unwrap();
    let h = sim.polynomial().specialize(&[(0, true)]).unwrap();
    let sim = Simulator::from_polynomial(&h).unwrap();
    if sim.sliced().has_cubic_terms() {
        let err = sim
            .amplitude(
                &BitString::zeros(6),
                &cfg1().with_quickcheck(QuickCheckMode::On),
            )
            .unwrap_err();
        assert!(matches!(err, EngineError::QuickCheckUnsupported));
    }
    let r = sim.amplitude(&BitString::zeros(6), &cfg1()).unwrap();
    assert!(!r.quickcheck_used);
}

#[test]
fn cubic_free_fast_path() {
    for seed in 0..6 {
        let density = GateDensity {
            ccz: 0.0,
            ..GateDensity::independent()
        };
        let c = GeneratorSpec::new(1 + seed as u32 % 2, seed)
            .with_extra_layers(1)
            .with_density(density)
            .build()
            .unwrap();
        let sim = Simulator::new(&c).unwrap();
        assert!(!sim.sliced().has_cubic_terms());
        assert_eq!(
            sim.amplitude(&BitString::zeros(c.n()), &cfg1())
                .unwrap()
                .method,
            Method::QuadraticForm
        );
        assert_matches_oracle(&c, &cfg1());
    }
}

#[test]
fn basis_input_reduction() {
    let c = GeneratorSpec::new(1, 21)
        .with_extra_layers(2)
        .build()
        .unwrap();
    let sim = Simulator::new(&c).unwrap();
    for xi in [0u128, 1, 9, 36, 63] {
        let x = BitString::from_u128(6, xi);
        let dense = statevector_from(&c, &x).unwrap();
        for yi in 0..64u128 {
            let y = BitString::from_u128(6, yi);
            let got = sim
                .amplitude_from_input(&x, &y, &cfg1())
                .unwrap()
                .amplitude
                .to_f64();
            assert!((got - dense.amplitude(&y).unwrap()).abs() < 1e-12);
        }
    }
    // without CNOTs the outcome is simply shifted by the input
    let mut diag = empty(1);
    diag.stages[0] = Stage::Diagonal(vec![DiagonalGate::ccz(0), DiagonalGate::cz(1, 0, 2)]);
    let f = crate::phasepoly::extract(&diag).0;
    let sim = Simulator::from_polynomial(&f).unwrap();
    let x = BitString::from_u128(6, 0b100101);
    let y = BitString::from_u128(6, 0b010001);
    assert_eq!(
        sim.amplitude_from_input(&x, &y, &cfg1()).unwrap().amplitude,
        sim.amplitude(&x.xor(&y), &cfg1()).unwrap().amplitude
    );
}

#[test]
fn resource_cap() {
    let c = GeneratorSpec::new(2, 1).build().unwrap();
    let sim = Simulator::new(&c).unwrap();
    let cfg = EngineConfig {
        max_sliced: 3,
        ..cfg1()
    };
    let err = sim.amplitude(&BitString::zeros(12), &cfg).unwrap_err();
    assert!(matches!(
        err,
        EngineError::ResourceLimit { size: 4, cap: 3 }
    ));
    let c = GeneratorSpec::new(6, 1).build().unwrap();
    let sim = Simulator::new(&c).unwrap();
    let err = sim.amplitude(&BitString::zeros(192), &cfg1()).unwrap_err();
    assert!(matches!(
        err,
        EngineError::ResourceLimit { size: 64, cap: 40 }
    ));
}

#[test]
fn outcome_shape_is_checked() {
    let sim = Simulator::new(&GeneratorSpec::new(1, 1).build().unwrap()).unwrap();
    assert!(sim.amplitude(&BitString::zeros(7), &cfg1()).is_err());
}

#[test]
fn k4_quickcheck_survivor_fraction() {
    let c = GeneratorSpec::new(4, 2024).build().unwrap();
    let sim = Simulator::new(&c).unwrap();
    let mut rng = SplitMix64::new(7);
    let mut ratio = 0.0;
    let trials = 8;
    for _ in 0..trials {
        let y = BitString::from_bools(&(0..48).map(|_| rng.bit()).collect::<Vec<_>>());
        let r = sim.amplitude(&y, &cfg1()).unwrap();
        assert!(r.quickcheck_used);
        assert!(r.nonzero_contributions <= r.evaluated);
        ratio += r.evaluated as f64 / r.total_patterns as f64;
    }
    ratio /= trials as f64;
    assert!((ratio - 0.25).abs() <= 0.05, "surviving fraction {ratio}");
}

#[test]
fn dyadic_canonical_form() {
    assert_eq!(DyadicAmplitude::new(12, 5), DyadicAmplitude::new(3, 3));
    assert_eq!(DyadicAmplitude::new(0, 9), DyadicAmplitude::ZERO);
    assert_eq!(DyadicAmplitude::new(-4, 1).to_string(), "-2/2^0");
    assert_eq!(DyadicAmplitude::ONE.to_string(), "1/2^0");
    assert_eq!(
        DyadicAmplitude::parse("-3/2^4"),
        Some(DyadicAmplitude::new(-3, 4))
    );
    assert_eq!(
        DyadicAmplitude::parse("6/2^2"),
        Some(DyadicAmplitude::new(3, 1))
    );
    assert_eq!(
        DyadicAmplitude::new(-3, 2).probability().to_string(),
        "9/2^4"
    );
    let p = DyadicAmplitude::new(1, 1).probability();
    assert_eq!(p.add(&p).add(&p).add(&p), DyadicProbability::one());
    assert!((DyadicAmplitude::new(-5, 3).to_f64() + 0.625).abs() < 1e-15);
    let big = DyadicAmplitude::new((1i128 << 100) + 1, 110);
    assert!((big.to_f64() - 2f64.powi(-10)).abs() < 1e-20);
    assert!((big.probability().to_f64() - 2f64.powi(-20)).abs() < 1e-25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k2_sampled_outcomes_match_oracle(seed in any::<u64>(), extra in 0usize..3, yi in 0u128..4096, independent in any::<bool>()) {
        let density = if independent { GateDensity::independent() } else { GateDensity::default() };
        let c = GeneratorSpec::new(2, seed).with_extra_layers(extra).with_density(density).build().unwrap();
        let sim = Simulator::new(&c).unwrap();
        let y = BitString::from_u128(12, yi);
        let got = sim.amplitude(&y, &cfg1()).unwrap();
        let want = statevector(&c).unwrap().amplitude(&y).unwrap();
        prop_assert!((got.amplitude.to_f64() - want).abs() < 1e-12);
        prop_assert!(got.nonzero_contributions <= got.evaluated);
    }
}

/// Per-pattern quadratic sums, independent of the elimination kernels.
fn pattern_sum_reference(s: &SlicedForm, y: [u64; 3]) -> DyadicAmplitude {
    let [mr, mg, mb] = s.sizes();
    let mut total = 0i128;
    for x in 0..1u64 << mr {
        let xr = BitVector::from_word(mr, x);
        let gamma = s.gamma_at(&xr);
        let (dg, db) = s.deltas_at(&xr);
        let mut q = QuadraticForm::new(mg + mb);
        for g in 0..mg {
            for b in 0..mb {
                if gamma.get(g, b) {
                    q.toggle_pair(g, mg + b);
                }
            }
        }
        for g in BitIter(dg.word() ^ y[1]) {
            q.toggle_linear(g);
        }
        for b in BitIter(db.word() ^ y[2]) {
            q.toggle_linear(mg + b);
        }
        if let Some((neg, twos)) = q.phase_sum() {
            let sign = neg ^ ((y[0] & x).count_ones() & 1 == 1);
            total += if sign { -1 } else { 1 } << twos;
        }
    }
    DyadicAmplitude::new(total, (mr + mg + mb) as u32)
}

#[test]
fn every_kernel_width_matches_pattern_sums() {
    let mut rng = SplitMix64::new(31);
    // Γ up to 16, up to 32, and wider than 32 columns
    for sizes in [[3, 10, 12], [3, 20, 24], [3, 40, 36]] {
        let n: usize = sizes.iter().sum();
        let mut next = 0;
        let regs = sizes.map(|s| {
            let r: Vec<usize> = (next..next + s).collect();
            next += s;
            r
        });
        let mut p = TriColorPolynomial::zero(crate::phasepoly::Coloring::from_registers(n, regs));
        for _ in 0..4 * n {
            let v = |c: Color, rng: &mut SplitMix64| {
                Var::new(c, rng.below(sizes[c.idx()] as u64) as usize)
            };
            let (r, g, b) = (
                v(Color::Red, &mut rng),
                v(Color::Green, &mut rng),
                v(Color::Blue, &mut rng),
            );
            match rng.below(4) {
                0 => p.toggle(&[r, g, b]),
                1 => p.toggle(&[r, g]),
                2 => p.toggle(&[r, b]),
                _ => p.toggle(&[g, b]),
            }
        }
        let s = slice(&p, canonical_cover(&p)).unwrap();
        assert_eq!(s.roles()[0], Color::Red);
        let mut nonzero = 0;
        for _ in 0..64 {
            let mut y = [0, 1, 2].map(|c| rng.next_u64() & ((1u64 << sizes[c]) - 1));
            if rng.bit() {
                // y_G = Γ0 u and y_B = wᵀ Γ0 keep the x^R = 0 term alive
                let (u, w) = (rng.next_u64(), rng.next_u64());
                let rows = s.gamma0_words();
                y[1] = rows
                    .iter()
                    .enumerate()
                    .fold(0, |a, (g, &r)| a | (((r & u).count_ones() & 1) as u64) << g);
                y[2] = BitIter(w & ((1u64 << sizes[1]) - 1)).fold(0, |a, g| a ^ rows[g]);
            }
            let bits = RegisterBits {
                bits: [0, 1, 2].map(|c| BitVector::from_word(sizes[c], y[c])),
            };
            let got = amplitude(&s, &bits, &cfg1().with_quickcheck(QuickCheckMode::Off)).unwrap();
            let want = pattern_sum_reference(&s, y);
            assert_eq!(got.amplitude, want, "sizes {sizes:?}");
            nonzero += !want.is_zero() as usize;
        }
        assert!(nonzero > 0, "sizes {sizes:?}: only zero amplitudes drawn");
    }
}
