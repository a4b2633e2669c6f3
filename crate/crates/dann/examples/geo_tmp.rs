// Temporary geometry probe; deleted before release.
use dann::data::{rotate_point, sample_moons, LabeledSet, MoonsConfig, UnlabeledSet};
use dann::divergence::{compute_pad, default_c_grid};
use dann::net::{risk, train, TrainConfig, TrainMode};
use dann::tensor::SparseVec;
use dann::Rng;

fn to_sparse(p: [f64; 2]) -> SparseVec {
    let mut e = Vec::new();
    if p[0] != 0.0 {
        e.push((0, p[0]));
    }
    if p[1] != 0.0 {
        e.push((1, p[1]));
    }
    SparseVec::new(2, e).unwrap()
}

fn gen(center_origin: bool, noise: f64, seed: u64) -> (LabeledSet, UnlabeledSet, LabeledSet) {
    let cfg = MoonsConfig { noise_sd: noise, seed, ..MoonsConfig::default() };
    let root = Rng::new(seed);
    let mut rs = root.derive(0x10);
    let mut rt = root.derive(0x11);
    let sp = sample_moons(&cfg, &mut rs);
    let tp = sample_moons(&cfg, &mut rt);
    let center = if center_origin {
        [0.0, 0.0]
    } else {
        let n = tp.len() as f64;
        let (sx, sy) = tp.iter().fold((0.0, 0.0), |(a, b), (p, _)| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    };
    let rot: Vec<([f64; 2], u8)> = tp
        .iter()
        .map(|(p, y)| (rotate_point(*p, 35.0, center), *y))
        .collect();
    let s = LabeledSet::new("s", 2, sp.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();
    let t = UnlabeledSet::new("t", 2, rot.iter().map(|(p, _)| to_sparse(*p)).collect()).unwrap();
    let tt = LabeledSet::new("tt", 2, rot.iter().map(|(p, y)| (to_sparse(*p), *y)).collect()).unwrap();
    (s, t, tt)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4000);
    for (name, origin, noise) in [
        ("origin/0.10", true, 0.10),
        ("origin/0.05", true, 0.05),
        ("centroid/0.05", false, 0.05),
    ] {
        let mut dmed = Vec::new();
        let mut nmed = Vec::new();
        let mut raw_pads = Vec::new();
        for seed in 0..6u64 {
            let (s, t, tt) = gen(origin, noise, 4000 + seed);
            let mut dc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::Dann);
            dc.max_epochs = epochs;
            dc.patience = epochs;
            let (dp, _) = train(&s, Some(&t), &dc).unwrap();
            let mut nc = TrainConfig::new(15, 0.0, 1e-3, seed, TrainMode::NnPlain);
            nc.max_epochs = epochs;
            nc.patience = epochs;
            let (np, _) = train(&s, None, &nc).unwrap();
            let de = risk(&dp, &tt).unwrap();
            let ne = risk(&np, &tt).unwrap();
            let pad = compute_pad(&s.features(), &t.examples, &default_c_grid(), seed, "raw")
                .unwrap()
                .pad_value;
            println!("  {name} seed {seed}: dann {de:.4} nn {ne:.4} rawpad {pad:.3}");
            dmed.push(de);
            nmed.push(ne);
            raw_pads.push(pad);
        }
        dmed.sort_by(f64::total_cmp);
        nmed.sort_by(f64::total_cmp);
        println!(
            "{name}: dann med {:.4} nn med {:.4} rawpad mean {:.3}",
            (dmed[2] + dmed[3]) / 2.0,
            (nmed[2] + nmed[3]) / 2.0,
            raw_pads.iter().sum::<f64>() / raw_pads.len() as f64
        );
    }
}
