//! Dev-time calibration runs: prints the measured quantities that the
//! integration suites freeze as golden values.

use hypexp::analysis::{hyperexp_log_margin, steady_state_residuals};
use hypexp::controller::{synthesize, synthesize_with, ControllerSpec, SynthesisOptions};
use hypexp::ct::{simulate_ct, CtOptions};
use hypexp::disturbance::{ChannelSignal, DisturbanceSpec};
use hypexp::dt::DtSystem;
use hypexp::GainSchedule;

fn unit_gain(n: usize) -> hypexp::SynthesizedController {
    let spec = ControllerSpec::new(n, vec![1.0; n], n as u32, GainSchedule::affine()).unwrap();
    synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: true,
            ..Default::default()
        },
    )
    .unwrap()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn main() {
    // golden tail residuals for the benchmark fixture
    let ctrl = unit_gain(3);
    let sys = DtSystem::new(ctrl, 0.001).unwrap();
    let dist = DisturbanceSpec::bench3(42).realize();
    println!("uniform draw (seed 42): {}", dist.uniform_draw);
    let traj = sys.simulate(&dist, &[1.0, 1.0, 1.0], 10_000, 1).unwrap();
    let res = steady_state_residuals(&traj, &dist, (8.0, 10.0)).unwrap();
    println!("bench residuals [8,10] h=1e-3: {res:?}");
    for window in [(4.0, 6.0), (6.0, 8.0)] {
        let r = steady_state_residuals(&traj, &dist, window).unwrap();
        println!("bench residuals {window:?}: {r:?}");
    }
    // reference run
    let ctrl_ref = unit_gain(3);
    let sys_ref = DtSystem::new(ctrl_ref, 0.0005).unwrap();
    let traj_ref = sys_ref
        .simulate(&dist, &[1.0, 1.0, 1.0], 40_000, 1)
        .unwrap();
    let res_ref = steady_state_residuals(&traj_ref, &dist, (8.0, 10.0)).unwrap();
    println!("bench residuals [8,10] h=5e-4 t_final=20 reference: {res_ref:?}");

    // gain-weighted log margins
    let c2 =
        synthesize(&ControllerSpec::new(2, vec![1.0, 2.0], 2, GainSchedule::affine()).unwrap())
            .unwrap();
    let d0 = DisturbanceSpec::zero(2).realize();
    let t2 = simulate_ct(&c2, &d0, &[1.0, 1.0], 5.0, &CtOptions::default()).unwrap();
    println!(
        "log-margin n=2 margin (t>=1): {}",
        hyperexp_log_margin(&t2, 1.0, 1.0)
    );
    let c3 = synthesize(
        &ControllerSpec::new(3, vec![1.0, 2.0, 4.0], 4, GainSchedule::affine()).unwrap(),
    )
    .unwrap();
    let d03 = DisturbanceSpec::zero(3).realize();
    let t3 = simulate_ct(&c3, &d03, &[1.0, 1.0, 1.0], 4.0, &CtOptions::default()).unwrap();
    println!(
        "log-margin n=3 margin (t>=1): {}",
        hyperexp_log_margin(&t3, 1.0, 1.0)
    );

    // contraction thresholds at h = 1
    for n in [2usize, 3] {
        let sys = DtSystem::new(unit_gain(n), 1.0).unwrap();
        let mut zeta = vec![1.0; n];
        let mut ratios = Vec::new();
        for k in 0..120 {
            let next = sys.sigma_step(&zeta, k, &vec![0.0; n]).unwrap();
            ratios.push(sup_norm(&next) / sup_norm(&zeta));
            zeta = next;
        }
        let k0 = ratios.iter().position(|&r| r < 0.1).unwrap();
        let all_after = ratios[k0..].iter().all(|&r| r < 0.1);
        println!(
            "contraction n={n}: first k with ratio < 0.1: {k0}, stays below: {all_after}, r[{k0}] = {:.4}, r[119] = {:.3e}",
            ratios[k0], ratios[119]
        );
    }

    // saturated-gain runs
    for cap in [10.0, 50.0] {
        let schedule = GainSchedule::affine().with_cap(cap).unwrap();
        let spec = ControllerSpec::new(2, vec![1.0, 2.0], 2, schedule).unwrap();
        let c = synthesize(&spec).unwrap();
        let dist = DisturbanceSpec::new(
            vec![ChannelSignal::sin(0.7, 5.0), ChannelSignal::cos(0.7, 3.0)],
            9,
        )
        .realize();
        let traj = simulate_ct(&c, &dist, &[1.0, 1.0], 50.0, &CtOptions::default()).unwrap();
        let sup_x = traj.sup_norm_state();
        let sup_u = traj.controls.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let half = traj.len() / 2;
        let max_first: f64 = traj.states[..half]
            .iter()
            .flat_map(|x| x.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let max_second: f64 = traj.states[half..]
            .iter()
            .flat_map(|x| x.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let (lo, hi) = traj.window_indices(40.0, 50.0).unwrap();
        let tail_x1: f64 = (lo..=hi)
            .map(|k| traj.states[k][0].abs())
            .fold(0.0, f64::max);
        println!(
            "saturated cap={cap}: sup|x|={sup_x:.4} sup|u|={sup_u:.4} max_first={max_first:.4} max_second={max_second:.4} tail|x1|[40,50]={tail_x1:.5}"
        );
    }

    // step-halving consistency ratios
    let dist = DisturbanceSpec::bench3(7).realize();
    let mut errs = Vec::new();
    for h in [1e-2, 5e-3, 2.5e-3] {
        let sys = DtSystem::new(unit_gain(3), h).unwrap();
        let k_max = (2.0 / h).round() as usize;
        let dt_traj = sys.simulate(&dist, &[1.0, 1.0, 1.0], k_max, 1).unwrap();
        let ct_opts = CtOptions {
            h_max: 1e-4,
            c_stab: 0.5,
            record_dt: h,
        };
        let ct_traj = simulate_ct(&unit_gain(3), &dist, &[1.0, 1.0, 1.0], 2.0, &ct_opts).unwrap();
        assert_eq!(dt_traj.len(), ct_traj.len());
        let mut e = 0.0f64;
        for k in 0..dt_traj.len() {
            assert!((dt_traj.times[k] - ct_traj.times[k]).abs() < 1e-9);
            for j in 0..3 {
                e = e.max((dt_traj.states[k][j] - ct_traj.states[k][j]).abs());
            }
        }
        println!("consistency h={h}: err={e:.6}");
        errs.push(e);
    }
    println!(
        "consistency ratios: {:.4} {:.4}",
        errs[1] / errs[0],
        errs[2] / errs[1]
    );
}
