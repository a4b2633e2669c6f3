// Temporary equilibrium diagnostic; deleted before release.
use dann::data::{rotate_point, sample_moons, LabeledSet, MoonsConfig, UnlabeledSet};
use dann::divergence::{default_c_grid, pad_on_representation};
use dann::net::{risk, TrainConfig, TrainMode, Trainer};
use dann::tensor::SparseVec;
use dann::Rng;

fn to_sparse(p: [f64; 2]) -> SparseVec {
    let mut e = Vec::new();
    if p[0] != 0.0 { e.push((0, p[0])); }
    if p[1] != 0.0 { e.push((1, p[1])); }
    SparseVec::new(2, e).unwrap()
}

fn main() {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let lambda: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let cfg_m = MoonsConfig { seed: 4000 + seed, ..MoonsConfig::default() };
    let root = Rng::new(4000 + seed);
    let mut rs = root.derive(0x10);
    let mut rt = root.derive(0x11);
    let sp = sample_moons(&cfg_m, &mut rs);
    let tp = sample_moons(&cfg_m, &mut rt);
    let rot: Vec<([f64; 2], u8)> = tp.iter().map(|(p, y)| (rotate_point(*p, 35.0, [0.0, 0.0]), *y)).collect();
    let s = LabeledSet::new("s", 2, sp.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();
    let t = UnlabeledSet::new("t", 2, rot.iter().map(|(p, _)| to_sparse(*p)).collect()).unwrap();
    let tt = LabeledSet::new("tt", 2, rot.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();

    let cfg = TrainConfig::new(15, lambda, 1e-3, seed, TrainMode::Dann);
    let mut tr = Trainer::new(2, &cfg).unwrap();
    println!("epoch  src  tgt  domacc  |w|  pad_svm");
    for block in 0..10 {
        for _ in 0..1000 {
            tr.epoch(&s, Some(&t)).unwrap();
        }
        let p = tr.params();
        let sr = risk(p, &s).unwrap();
        let te = risk(p, &tt).unwrap();
        let mut correct = 0usize;
        for (x, _) in &s.examples {
            if p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap() >= 0.5 { correct += 1; }
        }
        for x in &t.examples {
            if p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap() < 0.5 { correct += 1; }
        }
        let pad = pad_on_representation(p, &s.features(), &t.examples, &default_c_grid(), 9, "h").unwrap();
        println!(
            "{:5}  {sr:.3}  {te:.3}  {:.3}  {:.3}  {:.3}",
            (block + 1) * 1000,
            correct as f64 / 600.0,
            p.domain_weights.norm(),
            pad.pad_value
        );
    }
}
