//! Drives the four ribosomal stages one behavior run at a time, with the
//! world arranged so every stage's spatial preconditions hold.

use combichem_core::actor::{ActorKind, Composition};
use combichem_core::actor_vm::run_behavior;
use combichem_core::biokit::*;
use combichem_core::grid::Position;
use combichem_core::opcode::Opcode::{Hands, Neighbors};
use combichem_core::rng::seeded;
use combichem_core::world::World;

#[test]
fn staged_translation_walkthrough() {
    let kit = EnzymeKit::standard();
    let plasmid = Composition::new(vec![Hands, Neighbors, Hands]).unwrap();
    let mut w = World::new(16, 16);
    // serpentine: c0 (6,6), c1 (7,6), c2 (6,7)
    let chain = build_plasmid(&mut w, &plasmid, Position { x: 6, y: 6 }).unwrap();
    let r = build_ribosome(&mut w, Position { x: 6, y: 5 }, &kit, true);
    let enzymes: Vec<_> = match &w.expect_actor(r).kind {
        ActorKind::Object { contents, .. } => contents.clone(),
        _ => unreachable!(),
    };
    let (rib_a, rib_i, rib_e, rib_t) = (enzymes[0], enzymes[1], enzymes[2], enzymes[3]);
    let mut rng = seeded(5);

    // consumables staged around the path the ribosome will take
    for (op, x, y) in [(Hands, 5u16, 5u16), (Neighbors, 6, 4), (Hands, 8, 7)] {
        w.spawn_root(
            ActorKind::Combinator(Composition::single(op)),
            Position { x, y },
        );
    }

    // association: joins the origin's group, drops the self-bond
    let out = run_behavior(&mut w, &mut rng, rib_a).unwrap();
    assert!(out.succeeded(), "ribA failed, cost {}", out.cost.ticks);
    assert_eq!(w.expect_actor(r).group, w.expect_actor(chain[0]).group);
    assert_eq!(w.expect_actor(r).next, None);
    w.validate().unwrap();

    // the other stages cannot fire yet / again in the wrong phase
    assert!(!run_behavior(&mut w, &mut rng, rib_a).unwrap().succeeded());
    assert!(!run_behavior(&mut w, &mut rng, rib_e).unwrap().succeeded());
    assert!(!run_behavior(&mut w, &mut rng, rib_t).unwrap().succeeded());

    // initiation: swallows the hands-combinator at (5,5)
    let out = run_behavior(&mut w, &mut rng, rib_i).unwrap();
    assert!(out.succeeded(), "ribI failed, cost {}", out.cost.ticks);
    let contents_len = match &w.expect_actor(r).kind {
        ActorKind::Object { contents, .. } => contents.len(),
        _ => unreachable!(),
    };
    assert_eq!(contents_len, 5);
    w.validate().unwrap();
    // no double initiation while the chain sits at length one
    assert!(!run_behavior(&mut w, &mut rng, rib_i).unwrap().succeeded());

    // elongation step 0: c1 is within the neighborhood of (6,5)
    let out = run_behavior(&mut w, &mut rng, rib_e).unwrap();
    assert!(out.succeeded(), "ribE step 0 failed, cost {}", out.cost.ticks);
    assert_eq!(w.expect_actor(r).group, w.expect_actor(chain[1]).group);
    w.validate().unwrap();

    // realign: put the ribosome next to c2 (the terminal) for step 1
    w.move_root(r, Position { x: 7, y: 7 });
    let out = run_behavior(&mut w, &mut rng, rib_e).unwrap();
    assert!(out.succeeded(), "ribE step 1 failed, cost {}", out.cost.ticks);
    assert_eq!(w.expect_actor(r).group, w.expect_actor(chain[2]).group);
    w.validate().unwrap();

    // elongation cannot run past the terminal
    assert!(!run_behavior(&mut w, &mut rng, rib_e).unwrap().succeeded());

    // termination: expels the finished enzyme, restores the self-bond
    let out = run_behavior(&mut w, &mut rng, rib_t).unwrap();
    assert!(out.succeeded(), "ribT failed, cost {}", out.cost.ticks);
    w.validate().unwrap();
    let expelled = expelled_enzymes(&w, &plasmid);
    assert_eq!(expelled.len(), 1);
    let e = w.expect_actor(expelled[0]);
    assert!(e.kind.is_behavior());
    assert_eq!(e.pos, Some(Position { x: 7, y: 7 })); // at the ribosome's site
    assert_eq!(w.expect_actor(r).next, Some(r));
    assert_eq!(
        w.group(w.expect_actor(r).group).unwrap().members.len(),
        1,
        "detached after termination"
    );
}
