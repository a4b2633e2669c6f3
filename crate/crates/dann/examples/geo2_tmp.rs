// Temporary long-run probe; deleted before release.
use dann::data::{rotate_point, sample_moons, LabeledSet, MoonsConfig, UnlabeledSet};
use dann::net::{risk, TrainConfig, TrainMode, Trainer};
use dann::tensor::SparseVec;
use dann::Rng;

fn to_sparse(p: [f64; 2]) -> SparseVec {
    let mut e = Vec::new();
    if p[0] != 0.0 { e.push((0, p[0])); }
    if p[1] != 0.0 { e.push((1, p[1])); }
    SparseVec::new(2, e).unwrap()
}

fn gen(noise: f64, seed: u64) -> (LabeledSet, UnlabeledSet, LabeledSet) {
    let cfg = MoonsConfig { noise_sd: noise, seed, ..MoonsConfig::default() };
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
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(12000);
    let lambda: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let seed_lo: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let seed_hi: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10);
    let mut meds = Vec::new();
    for seed in seed_lo..seed_hi {
        let (s, t, tt) = gen(0.10, 4000 + seed);
        let alpha: f64 = std::env::args().nth(5).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
        let cfg = TrainConfig::new(15, lambda, alpha, seed, TrainMode::Dann);
        let mut tr = Trainer::new(2, &cfg).unwrap();
        print!("seed {seed}:");
        let mut final_e = 1.0;
        for block in 0..6 {
            for _ in 0..epochs / 6 {
                tr.epoch(&s, Some(&t)).unwrap();
            }
            let te = risk(tr.params(), &tt).unwrap();
            let se = risk(tr.params(), &s).unwrap();
            print!("  [{}] t{te:.3}/s{se:.3}", (block + 1) * (epochs / 6));
            final_e = te;
        }
        println!();
        meds.push(final_e);
    }
    meds.sort_by(f64::total_cmp);
    println!("median final {:.4}", (meds[meds.len()/2 - 1] + meds[meds.len()/2]) / 2.0);
}
