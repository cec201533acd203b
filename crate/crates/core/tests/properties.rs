use cbx_core::analysis::LbeSeries;
use cbx_core::keygen::MAX_KEY_BYTE;
use cbx_core::*;
use proptest::prelude::*;

fn key_bytes(len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=MAX_KEY_BYTE, len)
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::sample::select(Scheme::ALL.to_vec())
}

proptest! {
    #[test]
    fn orbit_is_deterministic(x0 in -1.0f64..=1.0, r in 2.0f64..3.9, s in scheme(), n in 0usize..300) {
        let cfg = MapConfig::new(r, x0, s);
        let a = iterate_orbit(&cfg, n).unwrap();
        let b = iterate_orbit(&cfg, n).unwrap();
        let bits = |o: &PseudoOrbit| o.samples().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a.samples().len(), n + 1);
        prop_assert!(a.samples().iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn lbe_symmetric_and_nonnegative(x0 in -1.0f64..=1.0, s1 in scheme(), s2 in scheme()) {
        let a = iterate_orbit(&MapConfig::new(3.6, x0, s1), 200).unwrap();
        let b = iterate_orbit(&MapConfig::new(3.6, x0, s2), 200).unwrap();
        let ab = lower_bound_error(&a, &b).unwrap();
        let ba = lower_bound_error(&b, &a).unwrap();
        prop_assert_eq!(ab.delta(), ba.delta());
        prop_assert!(ab.delta().iter().all(|&d| d >= 0.0));
        prop_assert_eq!(ab.delta()[0], 0.0);
        prop_assert!(lower_bound_error(&a, &a).unwrap().delta().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn regression_recovers_exponent(lambda in 0.01f64..=1.0, c in -40.0f64..-20.0, len in 10usize..400) {
        let delta: Vec<f64> = (0..len).map(|n| (c + lambda * n as f64).exp()).collect();
        let series = LbeSeries::from_deltas(delta).unwrap();
        let est = lyapunov_from_lbe(&series, Some(0..len)).unwrap();
        prop_assert!((est.lambda - lambda).abs() <= 1e-9, "{} vs {}", est.lambda, lambda);
        prop_assert!(est.r_squared >= 1.0 - 1e-12);
    }

    #[test]
    fn keystream_bytes_in_range(x0 in -1.0f64..=1.0, s in scheme(), n in 1usize..2000) {
        let cfg = KeystreamConfig::SingleOrbit { map: MapConfig::new(3.6, x0, s), iterations: n };
        let stream = generate_keystream(&cfg, n).unwrap();
        prop_assert_eq!(stream.len(), n);
        prop_assert!(stream.iter().all(|&b| b <= MAX_KEY_BYTE));
    }

    #[test]
    fn normalize_never_hits_255(x in -1.0f64..=1.0) {
        prop_assert!(normalize_sample(x).unwrap() <= MAX_KEY_BYTE);
    }

    #[test]
    fn matrix_fill_is_column_major_bijection(w in 1usize..20, h in 1usize..20, extra in 0usize..5, seed in any::<u64>()) {
        let stream: Vec<u8> = (0..w * h + extra)
            .map(|i| ((seed.rotate_left(i as u32 % 64) ^ i as u64) % 255) as u8)
            .collect();
        let m = build_key_matrix(&stream, w, h).unwrap();
        prop_assert!(m.column_major().eq(stream[..w * h].iter().copied()));
    }

    #[test]
    fn xor_involution_and_commutation(
        (w, h, pixels, k1, k2) in (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), prop::collection::vec(any::<u8>(), w * h), key_bytes(w * h), key_bytes(w * h))
        })
    ) {
        let image = GrayImage::new(w, h, pixels).unwrap();
        let key1 = build_key_matrix(&k1, w, h).unwrap();
        let key2 = build_key_matrix(&k2, w, h).unwrap();
        prop_assert!(xor_involution_check(&image, &key1).unwrap());
        let a = xor_apply(&xor_apply(&image, &key1).unwrap(), &key2).unwrap();
        let b = xor_apply(&xor_apply(&image, &key2).unwrap(), &key1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn key_change_is_local(
        (pixels, key, idx, flip) in (prop::collection::vec(any::<u8>(), 64), key_bytes(64), 0usize..64, 1u8..=127)
    ) {
        let image = GrayImage::new(8, 8, pixels).unwrap();
        let mut other = key.clone();
        other[idx] = if other[idx] ^ flip <= MAX_KEY_BYTE { other[idx] ^ flip } else { other[idx] ^ 1 };
        prop_assume!(other[idx] != key[idx] && other[idx] <= MAX_KEY_BYTE);
        let c1 = xor_apply(&image, &build_key_matrix(&key, 8, 8).unwrap()).unwrap();
        let c2 = xor_apply(&image, &build_key_matrix(&other, 8, 8).unwrap()).unwrap();
        let diffs = c1.pixels().iter().zip(c2.pixels()).filter(|(a, b)| a != b).count();
        prop_assert_eq!(diffs, 1);
    }

    #[test]
    fn entropy_permutation_invariant(data in prop::collection::vec(any::<u8>(), 1..2000), shift in any::<u8>()) {
        let relabeled: Vec<u8> = data.iter().map(|b| b.wrapping_add(shift)).collect();
        let e1 = shannon_entropy(&histogram(&data).unwrap());
        let e2 = shannon_entropy(&histogram(&relabeled).unwrap());
        prop_assert!((e1.h_bits - e2.h_bits).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&e1.h_norm));
        prop_assert!((0.0..=8.0).contains(&e1.h_bits));
        let h = histogram(&data).unwrap();
        prop_assert_eq!(h.bins().iter().sum::<u64>(), h.total());
    }
}

#[test]
fn h_norm_is_one_only_for_flat_histograms() {
    let mut counts = [300u64; 256];
    assert_eq!(shannon_entropy(&Histogram::from_counts(counts).unwrap()).h_norm, 1.0);
    counts[0] = 301;
    assert!(shannon_entropy(&Histogram::from_counts(counts).unwrap()).h_norm < 1.0);
}

#[test]
fn default_keystream_statistics() {
    let stream = generate_keystream(&KeystreamConfig::single_orbit(Scheme::E1), 65536).unwrap();
    let hist = histogram(&stream).unwrap();
    assert_eq!(hist.bins()[255], 0);
    let e = shannon_entropy(&hist);
    assert!(e.h_norm >= 0.95, "{e:?}");
}

#[test]
fn ciphertext_low_bits_are_balanced() {
    let stream = generate_keystream(&KeystreamConfig::single_orbit(Scheme::E1), 65536).unwrap();
    let key = build_key_matrix(&stream, 256, 256).unwrap();
    let image = GrayImage::new(256, 256, vec![0x5A; 65536]).unwrap();
    let cipher = xor_apply(&image, &key).unwrap();
    // bit 7 is skewed because key bytes stop at 254
    for bit in 0..7 {
        let ones = cipher.pixels().iter().filter(|&&p| p >> bit & 1 == 1).count();
        let fraction = ones as f64 / 65536.0;
        assert!((0.45..=0.55).contains(&fraction), "bit {bit}: {fraction}");
    }
}
