// Temporary noise/width sweep; deleted before release.
use dann::data::{rotate_point, sample_moons, LabeledSet, MoonsConfig, UnlabeledSet};
use dann::net::{risk, train, TrainConfig, TrainMode};
use dann::tensor::SparseVec;
use dann::Rng;

fn to_sparse(p: [f64; 2]) -> SparseVec {
    let mut e = Vec::new();
    if p[0] != 0.0 { e.push((0, p[0])); }
    if p[1] != 0.0 { e.push((1, p[1])); }
    SparseVec::new(2, e).unwrap()
}

fn gen(noise: f64, width: f64, seed: u64) -> (LabeledSet, UnlabeledSet, LabeledSet) {
    let cfg = MoonsConfig { noise_sd: noise, width, seed, ..MoonsConfig::default() };
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

fn main() {
    let epochs: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(12000);
    for (noise, width) in [(0.02f64, 0.5f64), (0.05, 0.3), (0.05, 0.2), (0.02, 0.3)] {
        let mut des = Vec::new();
        let mut nes = Vec::new();
        for seed in 0..6u64 {
            let (s, t, tt) = gen(noise, width, 4000 + seed);
            let mut dc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::Dann);
            dc.max_epochs = epochs;
            dc.patience = epochs;
            let (dp, _) = train(&s, Some(&t), &dc).unwrap();
            des.push(risk(&dp, &tt).unwrap());
            let mut nc = TrainConfig::new(15, 0.0, 1e-3, seed, TrainMode::NnPlain);
            nc.max_epochs = epochs;
            nc.patience = epochs;
            let (np, _) = train(&s, None, &nc).unwrap();
            nes.push(risk(&np, &tt).unwrap());
        }
        des.sort_by(f64::total_cmp);
        nes.sort_by(f64::total_cmp);
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        println!(
            "noise {noise} width {width}: dann med {:.4} [{}] | nn med {:.4}",
            (des[2] + des[3]) / 2.0, fmt(&des), (nes[2] + nes[3]) / 2.0
        );
    }
}
