// Temporary calibration probe; deleted before release.
use dann::data::{gen_moons, MoonsConfig};
use dann::divergence::{compute_pad, default_c_grid, pad_on_representation};
use dann::net::{risk, train, TrainConfig, TrainMode};
use dann::Rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("c2");
    let max_epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let patience: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(100);

    match which {
        "c2" => c2(max_epochs, patience),
        "c3" => c3(max_epochs, patience),
        "c4" => c4(max_epochs, patience),
        _ => panic!("unknown probe"),
    }
}

fn c2(max_epochs: usize, patience: usize) {
    let t0 = std::time::Instant::now();
    let mut dann_errs = Vec::new();
    let mut nn_errs = Vec::new();
    for seed in 0..10u64 {
        let moons = MoonsConfig::default().with_seed(1000 + seed);
        let (s, t, truth) = gen_moons(&moons).unwrap();

        let mut dc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::Dann);
        dc.max_epochs = max_epochs;
        dc.patience = patience;
        let (dp, drep) = train(&s, Some(&t), &dc).unwrap();
        let de = risk(&dp, &truth).unwrap();
        let ds = risk(&dp, &s).unwrap();

        let mut nc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::NnWithRegressor);
        nc.max_epochs = max_epochs;
        nc.patience = patience;
        let (np, nrep) = train(&s, Some(&t), &nc).unwrap();
        let ne = risk(&np, &truth).unwrap();
        let ns = risk(&np, &s).unwrap();

        println!(
            "seed {seed}: dann tgt {de:.4} src {ds:.4} ({} ep, best {}), nn tgt {ne:.4} src {ns:.4} ({} ep, best {})",
            drep.epochs_run, drep.best_epoch, nrep.epochs_run, nrep.best_epoch
        );
        dann_errs.push(de);
        nn_errs.push(ne);
    }
    dann_errs.sort_by(f64::total_cmp);
    nn_errs.sort_by(f64::total_cmp);
    let med = |v: &[f64]| (v[4] + v[5]) / 2.0;
    println!(
        "median dann {:.4} nn {:.4}  elapsed {:.1}s",
        med(&dann_errs),
        med(&nn_errs),
        t0.elapsed().as_secs_f64()
    );
}

fn c3(max_epochs: usize, patience: usize) {
    let t0 = std::time::Instant::now();
    let mut wins = 0;
    for seed in 0..10u64 {
        let moons = MoonsConfig::default().with_seed(2000 + seed);
        let (s, t, _) = gen_moons(&moons).unwrap();
        let sf = s.features();
        let tf = t.examples.clone();

        let mut dc = TrainConfig::new(100, 0.31, 1e-3, seed, TrainMode::Dann);
        dc.max_epochs = max_epochs;
        dc.patience = patience;
        let (dp, _) = train(&s, Some(&t), &dc).unwrap();

        let mut nc = TrainConfig::new(100, 0.0, 1e-3, seed, TrainMode::NnPlain);
        nc.max_epochs = max_epochs;
        nc.patience = patience;
        let (np, _) = train(&s, None, &nc).unwrap();

        let pad_seed = Rng::new(seed).derive_seed(7);
        let grid = default_c_grid();
        let pd = pad_on_representation(&dp, &sf, &tf, &grid, pad_seed, "dann").unwrap();
        let pn = pad_on_representation(&np, &sf, &tf, &grid, pad_seed, "nn").unwrap();
        let pr = compute_pad(&sf, &tf, &grid, pad_seed, "raw").unwrap();
        let win = pd.pad_value < pn.pad_value;
        if win {
            wins += 1;
        }
        println!(
            "seed {seed}: pad dann {:.4} nn {:.4} raw {:.4} {}",
            pd.pad_value,
            pn.pad_value,
            pr.pad_value,
            if win { "WIN" } else { "lose" }
        );
    }
    println!("wins {wins}/10  elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn c4(max_epochs: usize, patience: usize) {
    let t0 = std::time::Instant::now();
    let mut dann_ok = 0;
    let mut nn_ok = 0;
    for seed in 0..10u64 {
        let moons = MoonsConfig::default().with_seed(3000 + seed);
        let (s, t, _) = gen_moons(&moons).unwrap();
        // Fresh held-out draws from both domains.
        let held = MoonsConfig::default().with_seed(900_000 + seed);
        let (hs, ht, _) = gen_moons(&held).unwrap();

        let mut dc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::Dann);
        dc.max_epochs = max_epochs;
        dc.patience = patience;
        let (dp, _) = train(&s, Some(&t), &dc).unwrap();

        let mut nc = TrainConfig::new(15, 6.0, 1e-3, seed, TrainMode::NnWithRegressor);
        nc.max_epochs = max_epochs;
        nc.patience = patience;
        let (np, _) = train(&s, Some(&t), &nc).unwrap();

        let acc = |p: &dann::DannParams| -> f64 {
            let mut correct = 0usize;
            let mut total = 0usize;
            for (x, _) in &hs.examples {
                let o = p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap();
                if o >= 0.5 {
                    correct += 1;
                }
                total += 1;
            }
            for x in &ht.examples {
                let o = p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap();
                if o < 0.5 {
                    correct += 1;
                }
                total += 1;
            }
            correct as f64 / total as f64
        };
        let da = acc(&dp);
        let na = acc(&np);
        let d_in = (da - 0.5).abs() <= 0.10;
        let n_in = na >= 0.60;
        if d_in {
            dann_ok += 1;
        }
        if n_in {
            nn_ok += 1;
        }
        println!("seed {seed}: dann domain acc {da:.4} ({d_in}), nn {na:.4} ({n_in})");
    }
    println!("dann within band {dann_ok}/10, nn above {nn_ok}/10, elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
