use markov_aloha::analytic::pe_dh;
use markov_aloha::density::{de_run, LlrGrid, DEFAULT_MAX_ITER, DEFAULT_TOL};
use markov_aloha::policy::average_aoi;
use markov_aloha::sim::{aggregate, EstimatorChoice, SimConfig};
use markov_aloha::{SourceParams, Strategy, SystemConfig};

fn sim(system: SystemConfig, slots: u64, reps: usize, seed: u64) -> SimConfig {
    SimConfig {
        replications: reps,
        master_seed: seed,
        ..SimConfig::new(system).with_measured_slots(slots)
    }
}

fn symmetric(m: usize, q: f64, s: Strategy) -> SystemConfig {
    SystemConfig::new(m, SourceParams::symmetric(q).unwrap(), s).unwrap()
}

#[test]
fn decode_and_hold_matches_closed_form() {
    for s in [Strategy::random(0.1).unwrap(), Strategy::Reactive] {
        let cfg = symmetric(10, 0.1, s);
        let mut c = sim(cfg, 100_000, 8, 1);
        c.estimators = EstimatorChoice::Dh;
        let r = aggregate(&c).unwrap();
        let want = pe_dh(&cfg).pe;
        let got = r.pe_dh.unwrap();
        assert!(got.within(want, 3.0), "{s:?} {got:?} {want}");
    }
}

#[test]
fn aoi_matches_closed_form() {
    for s in [Strategy::random(0.2).unwrap(), Strategy::Reactive] {
        let cfg = symmetric(5, 0.1, s);
        let mut c = sim(cfg, 100_000, 8, 2);
        c.estimators = EstimatorChoice::Dh;
        let r = aggregate(&c).unwrap();
        let want = average_aoi(cfg.delivery_probability());
        assert!(r.aoi.within(want, 3.0), "{s:?} {:?} {want}", r.aoi);
    }
}

#[test]
fn density_evolution_matches_simulated_entropy() {
    let cfg = symmetric(5, 0.1, Strategy::random(0.2).unwrap());
    let de = de_run(&cfg, &LlrGrid::default(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let r = aggregate(&sim(cfg, 100_000, 8, 3)).unwrap();
    let see = r.see.unwrap();
    assert!(see.within(de.see, 3.0), "{see:?} {}", de.see);
    let pe = r.pe_map.unwrap();
    assert!(pe.within(de.pe_map, 3.0), "{pe:?} {}", de.pe_map);
}

#[test]
fn two_reactive_sources_are_known_exactly() {
    let cfg = symmetric(2, 0.01, Strategy::Reactive);
    let de = de_run(&cfg, &LlrGrid::default(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(de.see <= 1e-3);
    let r = aggregate(&sim(cfg, 200_000, 2, 4)).unwrap();
    assert!(r.see.unwrap().mean <= 1e-3);
}
