// Temporary dynamics probe; deleted before release.
use dann::data::{gen_moons, MoonsConfig};
use dann::net::{risk, TrainConfig, TrainMode, Trainer};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let lambda: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let hidden: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(15);
    let epochs: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(4000);
    let seed: u64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1);

    let moons = MoonsConfig::default().with_seed(1000 + seed);
    let (s, t, truth) = gen_moons(&moons).unwrap();

    let cfg = TrainConfig::new(hidden, lambda, alpha, seed, TrainMode::Dann);
    let mut tr = Trainer::new(2, &cfg).unwrap();
    println!("epoch  src_risk  tgt_risk  dom_acc  |w|  |W|max  o_range");
    for e in 0..epochs {
        tr.epoch(&s, Some(&t)).unwrap();
        if (e + 1) % (epochs / 20).max(1) == 0 {
            let p = tr.params();
            let sr = risk(p, &s).unwrap();
            let tr_ = risk(p, &truth).unwrap();
            let mut correct = 0usize;
            let mut omin = 1.0f64;
            let mut omax = 0.0f64;
            for (x, _) in &s.examples {
                let o = p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap();
                omin = omin.min(o);
                omax = omax.max(o);
                if o >= 0.5 {
                    correct += 1;
                }
            }
            for x in &t.examples {
                let o = p.domain_regressor(&p.forward_hidden(x).unwrap()).unwrap();
                omin = omin.min(o);
                omax = omax.max(o);
                if o < 0.5 {
                    correct += 1;
                }
            }
            let dom_acc = correct as f64 / 600.0;
            let wn = p.domain_weights.norm();
            let wmax = p
                .hidden_weights
                .as_slice()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            println!(
                "{:5}  {sr:.4}    {tr_:.4}    {dom_acc:.4}  {wn:.3}  {wmax:.3}  [{omin:.3},{omax:.3}]",
                e + 1
            );
        }
    }
}
