use combichem_core::actor::{ActorKind, Composition};
use combichem_core::biokit::*;
use combichem_core::rng::seeded;
use combichem_core::sim::{EventKind, SimConfig, Simulation};
use combichem_core::opcode::Opcode::{Hands, Neighbors, Nexts, Prevs};
use std::collections::BTreeMap;

#[test]
#[ignore]
fn riba_cost_distribution_in_sim() {
    let kit = EnzymeKit::standard();
    let plasmid = Composition::new(vec![Hands, Nexts, Hands, Prevs, Hands, Neighbors]).unwrap();
    let mut rng = seeded(0);
    let (world, targets, ribosome) = translation_world(&plasmid, 16, 16, &kit, &mut rng).unwrap();
    let enzymes: Vec<_> = match &world.expect_actor(ribosome).kind {
        ActorKind::Object { contents, .. } => contents.clone(),
        _ => unreachable!(),
    };
    let config = SimConfig { replenish: targets, ..SimConfig::default() };
    let mut sim = Simulation::new(world, config, rng);
    let mut cost_hist: BTreeMap<u64, u32> = BTreeMap::new();
    let mut attempts = 0;
    while sim.event_count < 300_000 && attempts < 60 {
        match sim.step() {
            None => break,
            Some(r) if r.kind == EventKind::Action && r.behavior == Some(enzymes[0]) => {
                attempts += 1;
                *cost_hist.entry(r.cost).or_default() += 1;
                if r.succeeded {
                    println!("SUCCEEDED at attempt {attempts}, t {:.1}", sim.now);
                    break;
                }
            }
            _ => {}
        }
    }
    println!("ribA fail-cost histogram: {cost_hist:?}");
    // where are things?
    let r = sim.world.expect_actor(ribosome);
    println!("R pos {:?} next {:?}", r.pos, r.next);
}
