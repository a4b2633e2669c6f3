// Temporary training-knob sweep; deleted before release.
use dann::data::{rotate_point, sample_moons, LabeledSet, MoonsConfig, UnlabeledSet};
use dann::net::{risk, DannParams, TrainConfig, TrainMode, Trainer};
use dann::tensor::SparseVec;
use dann::{DenseMat, DenseVec, Rng};

fn to_sparse(p: [f64; 2]) -> SparseVec {
    let mut e = Vec::new();
    if p[0] != 0.0 { e.push((0, p[0])); }
    if p[1] != 0.0 { e.push((1, p[1])); }
    SparseVec::new(2, e).unwrap()
}

fn gen(seed: u64) -> (LabeledSet, UnlabeledSet, LabeledSet) {
    let cfg = MoonsConfig { seed, ..MoonsConfig::default() };
    let root = Rng::new(seed);
    let mut rs = root.derive(0x10);
    let mut rt = root.derive(0x11);
    let sp = sample_moons(&cfg, &mut rs);
    let tp = sample_moons(&cfg, &mut rt);
    let rot: Vec<([f64; 2], u8)> = tp.iter().map(|(p, y)| (rotate_point(*p, 35.0, [0.0, 0.0]), *y)).collect();
    let s = LabeledSet::new("s", 2, sp.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();
    let t = UnlabeledSet::new("t", 2, rot.iter().map(|(p, _)| to_sparse(*p)).collect()).unwrap();
    let tt = LabeledSet::new("tt", 2, rot.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();
    (s, t, tt)
}

fn big_init(n: usize, l: usize, scale: f64, seed: u64) -> DannParams {
    let mut rng = Rng::new(seed).derive(0x01);
    let mut hw = DenseMat::zeros(l, n);
    for r in 0..l { for c in 0..n { hw.set(r, c, rng.uniform(-scale, scale)); } }
    let mut ow = DenseMat::zeros(2, l);
    for r in 0..2 { for c in 0..l { ow.set(r, c, rng.uniform(-scale / (l as f64).sqrt(), scale / (l as f64).sqrt())); } }
    DannParams {
        hidden_weights: hw,
        hidden_bias: DenseVec::zeros(l),
        output_weights: ow,
        output_bias: DenseVec::zeros(2),
        domain_weights: DenseVec::zeros(l),
        domain_bias: 0.0,
    }
}

fn run(seed: u64, epochs: usize, shuffle: bool, init_scale: Option<f64>) -> (f64, f64, f64) {
    let (s, t, tt) = gen(4000 + seed);
    let mut cfg = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::Dann);
    cfg.shuffle = shuffle;
    let mut tr = Trainer::new(2, &cfg).unwrap();
    if let Some(sc) = init_scale {
        tr.set_params(big_init(2, 15, sc, seed)).unwrap();
    }
    for _ in 0..epochs {
        tr.epoch(&s, Some(&t)).unwrap();
    }
    let p = tr.params();
    // Error split by true moon.
    let mut err0 = 0.0;
    let mut err1 = 0.0;
    for (x, y) in &tt.examples {
        let wrong = (p.predict(x).unwrap() != *y) as u64 as f64;
        if *y == 0 { err0 += wrong / 150.0 } else { err1 += wrong / 150.0 }
    }
    (risk(p, &tt).unwrap(), err0, err1)
}

fn main() {
    let epochs: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(15000);
    for (name, shuffle, init) in [
        ("base", true, None),
        ("noshuffle", false, None),
        ("init1.0", true, Some(1.0)),
        ("init2.0", true, Some(2.0)),
    ] {
        let mut meds = Vec::new();
        let mut parts = Vec::new();
        for seed in 0..6u64 {
            let (e, e0, e1) = run(seed, epochs, shuffle, init);
            meds.push(e);
            parts.push(format!("{e:.3}(l{e0:.2}/u{e1:.2})"));
        }
        meds.sort_by(f64::total_cmp);
        println!("{name}: med {:.4}  [{}]", (meds[2] + meds[3]) / 2.0, parts.join(" "));
    }
}
