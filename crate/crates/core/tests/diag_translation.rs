use combichem_core::actor::Composition;
use combichem_core::biokit::*;
use combichem_core::rng::seeded;
use combichem_core::sim::{SimConfig, Simulation};
use combichem_core::opcode::Opcode::{Hands, Neighbors, Nexts, Prevs};

#[test]
#[ignore]
fn diagnose_translation() {
    let kit = EnzymeKit::standard();
    let plasmid = Composition::new(vec![Hands, Nexts, Hands, Prevs, Hands, Neighbors]).unwrap();
    let mut results = vec![];
    for seed in 0..10u64 {
        let mut rng = seeded(seed);
        let (world, targets, _ribosome) = translation_world(&plasmid, 16, 16, &kit, &mut rng).unwrap();
        let config = SimConfig { replenish: targets, d_ratio: 2.0, ..SimConfig::default() };
        let mut sim = Simulation::new(world, config, rng);
        let mut done_at = None;
        while sim.event_count < 1_500_000 {
            if sim.step().is_none() { break; }
            if sim.event_count % 512 == 0 && !expelled_enzymes(&sim.world, &plasmid).is_empty() {
                done_at = Some(sim.event_count);
                break;
            }
        }
        println!("seed {seed}: {done_at:?} (t = {:.0})", sim.now);
        results.push(done_at);
    }
    let ok = results.iter().filter(|r| r.map_or(false, |e| e <= 1_000_000)).count();
    println!("within 1M events: {ok}/10");
}
