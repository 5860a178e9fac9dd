use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgft::codec::{self, intra_predict, quantize, Bitstream, CodecConfig, DepthImage, Method, HEADER_LEN};
use sgft::contour::BlockContour;
use sgft::eval::{psnr, rd_sweep, to_csv, GRAPH_QPS};
use sgft::graph::block_graph;
use sgft::spectral::{eigendecompose, BasisCache};
use sgft::synth::{piecewise_smooth, uniform_noise};
use sgft::transforms::{dct_forward, sgft_forward, wgft_forward, Block};
use sgft::{Error, Exec};

#[test]
fn decoder_needs_only_the_bitstream() {
    let img = piecewise_smooth(48, 3, 7);
    for method in Method::ALL {
        let enc = codec::encode(&img, &CodecConfig::default().with_method(method).with_qp(24)).unwrap();
        // a fresh cache rebuilds every basis from the coded contours and header
        let dec = codec::decode_with_cache(&enc.bytes, &BasisCache::new()).unwrap();
        assert_eq!(dec.image, enc.reconstruction);
        assert_eq!(dec.modes, enc.modes);
        assert_eq!(dec.header.method, method);
    }
}

#[test]
fn finer_quantisation_never_hurts() {
    for seed in 0..3 {
        let img = piecewise_smooth(64, 3, seed);
        for method in Method::ALL {
            let points = rd_sweep(&img, method, &GRAPH_QPS, &CodecConfig::default(), Exec::Parallel).unwrap();
            for pair in points.windows(2) {
                assert!(pair[0].psnr_db >= pair[1].psnr_db, "{method} seed {seed}: {:?}", points);
            }
        }
    }
}

#[test]
fn reported_bits_are_the_stream_size() {
    let img = piecewise_smooth(40, 2, 1);
    let cfg = CodecConfig::default();
    let points = rd_sweep(&img, Method::Sgft, &[20, 30], &cfg, Exec::Sequential).unwrap();
    for p in &points {
        let enc = codec::encode(&img, &cfg.with_qp(p.qp)).unwrap();
        assert_eq!(p.bits_total, enc.bytes.len() * 8);
        assert_eq!(p.bits_per_pixel, p.bits_total as f64 / 1600.0);
        assert_eq!(p.psnr_db, psnr(&img, &enc.reconstruction).unwrap());
    }
    let a = to_csv(&points, &[("w", "0.1".into())]);
    let again = rd_sweep(&img, Method::Sgft, &[20, 30], &cfg, Exec::Parallel).unwrap();
    assert_eq!(a, to_csv(&again, &[("w", "0.1".into())]));
}

#[test]
fn signed_transform_needs_fewest_coefficients_on_aligned_edges() {
    // residual blocks split by a straight cut where the two sides swing
    // in opposite directions, as across a prediction boundary
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for qp in [16, 24, 32] {
        let (mut s, mut w, mut d) = (0, 0, 0);
        for _ in 0..500 {
            let cut = rng.random_range(1..4);
            let vertical = rng.random_bool(0.5);
            let pairs: Vec<_> = (0..4)
                .map(|i| if vertical { ((cut - 1, i), (cut, i)) } else { ((i, cut - 1), (i, cut)) })
                .collect();
            let contour = BlockContour::from_pixel_pairs(4, &pairs).unwrap();
            let a = rng.random_range(-60.0..60.0);
            let b = -a + rng.random_range(-4.0..4.0);
            let slope = rng.random_range(-1.5..1.5);
            let block = Block::from_fn(4, |x, y| {
                let side = if vertical { x >= cut } else { y >= cut };
                let t = if vertical { y } else { x } as f64;
                (if side { b } else { a }) + slope * t
            });
            let nz = |c: &[f64]| quantize(c, qp).unwrap().iter().filter(|&&v| v != 0).count();
            s += nz(sgft_forward(&block, &contour, 0.1).unwrap().coeffs());
            w += nz(wgft_forward(&block, &contour, 0.1).unwrap().coeffs());
            d += nz(dct_forward(&block).unwrap().coeffs());
        }
        assert!(s < w && s < d, "qp {qp}: sgft {s}, wgft {w}, dct {d}");
    }
}

#[test]
fn pwc_block_compacts_into_two_coefficients() {
    // two constant regions split by a vertical cut: the null vector and
    // the constant-like vector of the signed graph span the signal
    let pairs: Vec<_> = (0..4).map(|y| ((1, y), (2, y))).collect();
    let contour = BlockContour::from_pixel_pairs(4, &pairs).unwrap();
    let basis = eigendecompose(&block_graph(&contour, 0.1).unwrap().loopy_laplacian()).unwrap();
    let block = Block::from_fn(4, |x, _| if x < 2 { 30.0 } else { -70.0 });
    let c = basis.forward(block.pixels());
    let energy: f64 = c.iter().map(|v| v * v).sum();
    let top2: f64 = c[..2].iter().map(|v| v * v).sum();
    assert!(top2 / energy > 0.999, "{c:?}");
    let dct = dct_forward(&block).unwrap();
    assert!(dct.coeffs().iter().filter(|v| v.abs() > 1e-9).count() > 2);
}

#[test]
fn prediction_follows_the_contour() {
    // left region 40, right region 140, boundary continuing through the
    // block from the coded rows above
    let img = DepthImage::from_fn(16, 16, |x, _| if x < 10 { 40 } else { 140 }).unwrap();
    let contours = codec::detect_contours(&img, 30);
    let pred = intra_predict(img.samples(), 16, &contours, 8, 8, 8);
    let worst = (0..64).map(|i| (img.get(8 + i % 8, 8 + i / 8) as i32 - pred[i] as i32).abs()).max().unwrap();
    assert_eq!(worst, 0);
}

#[test]
fn flat_images_cost_almost_nothing() {
    for v in [0, 100, 255] {
        let img = DepthImage::filled(64, 64, v).unwrap();
        let enc = codec::encode(&img, &CodecConfig::default()).unwrap();
        let bs = Bitstream::parse(&enc.bytes).unwrap();
        assert_eq!(bs.contour_payload, vec![0]);
        assert!(enc.bytes.len() < HEADER_LEN + 1 + 4096 / 80);
        assert!(enc.modes.iter().all(|&m| !m));
    }
}

#[test]
fn corrupted_streams_fail_cleanly() {
    let enc = codec::encode(&uniform_noise(24, 24, 3), &CodecConfig::default()).unwrap();
    let mut bad = enc.bytes.clone();
    bad[..4].copy_from_slice(b"PNG\0");
    assert!(matches!(codec::decode(&bad), Err(Error::MalformedHeader(_))));
    for cut in [1, 10, enc.bytes.len() / 2] {
        assert!(matches!(codec::decode(&enc.bytes[..enc.bytes.len() - cut]), Err(Error::TruncatedPayload(_))));
    }
    // flipping payload bytes must never panic
    for i in HEADER_LEN..enc.bytes.len() {
        let mut flipped = enc.bytes.clone();
        flipped[i] ^= 0x5a;
        let _ = codec::decode(&flipped);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn no_drift(w in 1usize..40, h in 1usize..40, seed in any::<u64>(), qp in 0u8..=51, m in 0usize..3, smooth in any::<bool>()) {
        let img = if smooth {
            let p = piecewise_smooth(w.max(h), 3, seed);
            p.cropped(w, h)
        } else {
            uniform_noise(w, h, seed)
        };
        let cfg = CodecConfig::default().with_method(Method::ALL[m]).with_qp(qp);
        let enc = codec::encode(&img, &cfg).unwrap();
        let dec = codec::decode_detailed(&enc.bytes).unwrap();
        prop_assert_eq!(&dec.image, &enc.reconstruction);
        prop_assert_eq!(dec.modes, enc.modes);
        prop_assert_eq!((dec.image.width(), dec.image.height()), (w, h));
    }
}
