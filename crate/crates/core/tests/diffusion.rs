mod common;

use meshpaint::diffusion::{
    ddpm_step, make_linear_schedule, masked_sample, q_sample, toy_target, IdentityCodec, Latent, LatentCodec,
    NoisePredictor, NoiseSchedule, PooledCodec, SamplerConfig, ToyPredictor,
};
use meshpaint::texstate::{downsample_mask, GenerationMask, Label};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn alphabars_match_log_space_product() {
    let s = make_linear_schedule(1000, 1e-4, 0.02).unwrap();
    let mut log_sum = 0.0;
    for t in 1..=1000 {
        let beta = 1e-4 + (0.02 - 1e-4) * (t - 1) as f64 / 999.0;
        log_sum += (-beta).ln_1p();
        let oracle = log_sum.exp();
        assert!(((s.alphabar(t) - oracle) / oracle).abs() < 1e-12, "t = {t}");
        assert!(s.alphabar(t) < s.alphabar(t - 1));
    }
}

#[test]
fn forward_chain_variance_matches_closed_form() {
    // Iterate z_t = sqrt(1-b_t) z_{t-1} + sqrt(b_t) e_t from z0 = 0 and
    // compare against the one-shot marginal.
    let s = NoiseSchedule::default();
    let n = 20_000;
    let mut rng = StdRng::seed_from_u64(11);
    let mut z = vec![0.0; n];
    for t in 1..=250 {
        let b = s.beta(t);
        for v in z.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v = (1.0 - b).sqrt() * *v + b.sqrt() * e;
        }
    }
    let var = z.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let expect = 1.0 - s.alphabar(250);
    assert!(((var - expect) / expect).abs() < 0.05, "{var} vs {expect}");
}

#[test]
fn q_sample_is_affine_in_noise() {
    let s = NoiseSchedule::default();
    let z0 = Latent::from_fn(4, 4, 3, |i| i as f64 / 48.0);
    let n = Latent::from_fn(4, 4, 3, |i| normals(48, 5)[i]);
    let out = q_sample(&z0, 600, &n, &s).unwrap();
    let (a, b) = (s.alphabar(600).sqrt(), (1.0 - s.alphabar(600)).sqrt());
    for i in 0..48 {
        assert!((out.values[i] - (a * z0.values[i] + b * n.values[i])).abs() < 1e-15);
    }
}

#[test]
fn oracle_predictor_reverse_loop_reaches_target() {
    let s = make_linear_schedule(200, 1e-4, 0.02).unwrap();
    let target = Latent::from_fn(6, 6, 3, |i| ((i * 7) % 10) as f64 / 10.0);
    let mut z = Latent::from_fn(6, 6, 3, |i| normals(108, 1)[i]);
    for t in (1..=200).rev() {
        let ab = s.alphabar(t);
        let eps = Latent::from_fn(6, 6, 3, |i| (z.values[i] - ab.sqrt() * target.values[i]) / (1.0 - ab).sqrt());
        let noise = Latent::from_fn(6, 6, 3, |i| normals(108, 1000 + t as u64)[i]);
        z = ddpm_step(&z, &eps, t, &noise, &s).unwrap();
    }
    assert!(z.max_abs_diff(&target) < 1e-3);
}

fn toy_setup(res: usize, steps: usize, strength: f64, seed: u64) -> (SamplerConfig, ToyPredictor, meshpaint::diffusion::Conditioning) {
    let s = make_linear_schedule(steps, 1e-4, 0.02).unwrap();
    (
        SamplerConfig::new(strength, seed, s.clone()).unwrap(),
        ToyPredictor::new(s),
        common::toy_conditioning("a blue teapot", res),
    )
}

#[test]
fn never_generated_pixels_are_bit_exact() {
    let (cfg, pred, cond) = toy_setup(16, 300, 0.3, 4);
    let init = IdentityCodec.encode(&cond.init_view);
    let mask = common::random_mask(16, 99);
    let out = masked_sample(&init, &mask, &cfg, &pred, &cond).unwrap();
    for (p, l) in mask.labels.iter().enumerate() {
        let same = (0..3).all(|c| out.values[3 * p + c].to_bits() == init.values[3 * p + c].to_bits());
        assert_eq!(same, !l.is_generated(), "pixel {p} ({l:?})");
    }
}

#[test]
fn update_window_can_round_to_zero_steps() {
    // round(0.001 * 300) = 0: Update pixels are never generated.
    let (cfg, pred, cond) = toy_setup(8, 300, 0.001, 2);
    let init = IdentityCodec.encode(&cond.init_view);
    let out = masked_sample(&init, &GenerationMask::uniform(8, Label::Update), &cfg, &pred, &cond).unwrap();
    assert_eq!(out, init);
}

#[test]
fn all_new_converges_regardless_of_init() {
    let (cfg, pred, cond) = toy_setup(12, 200, 0.5, 8);
    let target = IdentityCodec.encode(&toy_target(&cond).unwrap());
    let mask = GenerationMask::uniform(12, Label::New);
    let a = masked_sample(&IdentityCodec.encode(&cond.init_view), &mask, &cfg, &pred, &cond).unwrap();
    let b = masked_sample(&Latent::zeros(12, 12, 3), &mask, &cfg, &pred, &cond).unwrap();
    assert!(a.max_abs_diff(&target) < 1e-9);
    assert!(b.max_abs_diff(&target) < 1e-9);
}

#[test]
fn update_fixed_point() {
    let (cfg, pred, cond) = toy_setup(10, 200, 0.5, 3);
    let target = IdentityCodec.encode(&toy_target(&cond).unwrap());
    let out = masked_sample(&target, &GenerationMask::uniform(10, Label::Update), &cfg, &pred, &cond).unwrap();
    assert!(out.max_abs_diff(&target) < 1e-9);
}

#[test]
fn same_inputs_same_bits() {
    let (cfg, pred, cond) = toy_setup(10, 100, 0.7, 21);
    let init = IdentityCodec.encode(&cond.init_view);
    let mask = common::random_mask(10, 4);
    let a = masked_sample(&init, &mask, &cfg, &pred, &cond).unwrap();
    let b = masked_sample(&init, &mask, &cfg, &pred, &cond).unwrap();
    assert_eq!(a, b);
}

/// Records the `z_t` it sees, then defers to the toy predictor.
struct Spy<'a> {
    inner: &'a ToyPredictor,
    seen: std::sync::Mutex<Vec<(usize, Latent)>>,
}

impl NoisePredictor for Spy<'_> {
    fn predict(&self, z: &Latent, t: usize, cond: &meshpaint::diffusion::Conditioning) -> Result<Latent, meshpaint::diffusion::DiffusionError> {
        self.seen.lock().unwrap().push((t, z.clone()));
        self.inner.predict(z, t, cond)
    }
}

#[test]
fn clamped_pixels_follow_forward_noising_of_init() {
    // Every Keep pixel handed to the predictor at t < T must look like init
    // noised to t: after removing sqrt(ab_t)·init the residual has
    // variance about 1 - ab_t.
    let (cfg, pred, cond) = toy_setup(24, 100, 0.5, 6);
    let init = IdentityCodec.encode(&cond.init_view);
    let spy = Spy { inner: &pred, seen: Default::default() };
    masked_sample(&init, &GenerationMask::uniform(24, Label::Keep), &cfg, &spy, &cond).unwrap();
    let seen = spy.seen.into_inner().unwrap();
    assert_eq!(seen.len(), 100);
    for (t, z) in seen.iter().filter(|(t, _)| *t < 100 && t % 20 == 0) {
        let ab = cfg.schedule.alphabar(*t);
        let var = z.values.iter().zip(&init.values).map(|(z, x)| (z - ab.sqrt() * x).powi(2)).sum::<f64>()
            / z.len() as f64;
        assert!((var / (1.0 - ab) - 1.0).abs() < 0.15, "t {t}: {var} vs {}", 1.0 - ab);
    }
}

#[test]
fn pooled_codec_with_downsampled_mask() {
    let res = 16;
    let codec = PooledCodec::new(4).unwrap();
    let s = make_linear_schedule(150, 1e-4, 0.02).unwrap();
    let pred = ToyPredictor::with_codec(s.clone(), codec);
    let cond = common::toy_conditioning("green", res);
    let mut mask = GenerationMask::uniform(res, Label::Keep);
    mask.labels[0] = Label::New;
    let small = downsample_mask(&mask, 4).unwrap();
    assert_eq!(small.labels[0], Label::New);
    let init = codec.encode(&cond.init_view);
    let cfg = SamplerConfig::new(0.5, 1, s).unwrap();
    let out = masked_sample(&init, &small, &cfg, &pred, &cond).unwrap();
    let target = pred.target_latent(&cond).unwrap();
    assert!((0..3).all(|c| (out.values[c] - target.values[c]).abs() < 1e-9));
    assert_eq!(&out.values[3..], &init.values[3..]);
}

#[test]
fn shape_errors() {
    let (cfg, pred, cond) = toy_setup(8, 10, 0.5, 1);
    let init = IdentityCodec.encode(&cond.init_view);
    assert!(masked_sample(&init, &GenerationMask::uniform(4, Label::New), &cfg, &pred, &cond).is_err());
    let bad = Latent::zeros(4, 4, 3);
    assert!(pred.predict(&bad, 3, &cond).is_err());
}
