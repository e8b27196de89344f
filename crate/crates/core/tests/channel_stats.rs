use mec_relay::channel::{draw, ChannelSampler, SeedSpec};

const N: u64 = 100_000;

fn samples(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let s = ChannelSampler::new(seed);
    let mut h = Vec::with_capacity(N as usize);
    let mut g = Vec::with_capacity(N as usize);
    for t in 0..N {
        let d = s.draw(t, 1);
        h.push(d.h2[0]);
        g.push(d.g2[0]);
    }
    (h, g)
}

#[test]
fn exponential_moments_and_median() {
    let (h, g) = samples(99);
    for v in [&h, &g] {
        let mean = v.iter().sum::<f64>() / N as f64;
        assert!((mean - 1.0).abs() < 0.005 + 1e-6, "mean {mean}");
        let above = v.iter().filter(|&&x| x > std::f64::consts::LN_2).count() as f64 / N as f64;
        // Standard error of 0.5 at this sample size is 0.00158; 3 sigma.
        assert!((above - 0.5).abs() < 0.0048, "median split {above}");
    }
}

#[test]
fn uplink_and_downlink_are_uncorrelated() {
    let (h, g) = samples(5);
    let n = N as f64;
    let (mh, mg) = (h.iter().sum::<f64>() / n, g.iter().sum::<f64>() / n);
    let cov = h.iter().zip(&g).map(|(a, b)| (a - mh) * (b - mg)).sum::<f64>() / n;
    let vh = h.iter().map(|a| (a - mh).powi(2)).sum::<f64>() / n;
    let vg = g.iter().map(|b| (b - mg).powi(2)).sum::<f64>() / n;
    let corr = cov / (vh * vg).sqrt();
    assert!(corr.abs() < 0.01, "corr {corr}");
}

#[test]
fn relays_within_a_draw_are_uncorrelated() {
    let s = ChannelSampler::new(8);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for t in 0..N {
        let d = s.draw(t, 2);
        a.push(d.h2[0]);
        b.push(d.h2[1]);
    }
    let n = N as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    assert!(cov.abs() < 0.01);
}

#[test]
fn kolmogorov_smirnov_at_one_percent() {
    let (mut h, _) = samples(31);
    h.sort_by(f64::total_cmp);
    let n = h.len() as f64;
    let d = h
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = -(-x).exp_m1();
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max);
    assert!(d < 1.6276 / n.sqrt(), "KS {d}");
}

#[test]
fn seed_spec_draw_matches_sampler() {
    let spec = SeedSpec::new(12, 345);
    assert_eq!(draw(spec, 3), ChannelSampler::new(12).draw(345, 3));
}
