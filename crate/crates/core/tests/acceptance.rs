//! One line per acceptance criterion. Run with
//! `cargo test -p simplexdb-core --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use common::*;
use rand::seq::IndexedRandom;
use rand::Rng;
use simplexdb_core::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn prov() -> Provenance {
    Provenance::new("desk", Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(), true)
}

fn zigzag_oracle() -> Outcome {
    let started = Instant::now();
    let (mut steps, mut rows) = (0, 0);
    for case in 0..200u64 {
        let mut r = rng(1000 + case);
        let schema = random_graph_schema(&mut r);
        let sheaf = random_concrete_sheaf(&mut r, &schema, 30);
        ensure!(sheaf.validate().is_empty(), "case {case}: generated sheaf invalid");
        let z = random_zigzag(&mut r, &schema, 8);
        let base = sheaf.concrete(&z.start).unwrap();
        let keys: Vec<Key> = base.keys().filter(|_| r.random_bool(0.7)).cloned().collect();
        let sel = Selection::from_keys(&sheaf, &z.start, &keys).map_err(|e| e.to_string())?;
        let got = evaluate(&sheaf, &z, &sel).map_err(|e| format!("case {case}: {e}"))?;
        let want = oracle_graph(&sheaf, &z, &keys);
        ensure!(sorted_tuples(&got.graph) == want, "case {case}: graph differs from oracle on {z:?}");
        steps += z.steps.len();
        rows += want.len();
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("200 sheaves, {steps} steps, {rows} graph rows"))
}

fn odometer() -> Outcome {
    let ws = Workspace::new(0).drop_tile(&difference_tile("int", 3, prov()).unwrap(), None, None).unwrap();
    let attach = Attachment { workspace: "difference_3.t".into(), tile: "s".into(), matching: vec![0] };
    let ws = ws.drop_tile(&difference_tile("int", 4, prov()).unwrap(), Some(attach), None).map_err(|e| e.to_string())?;
    let ids: Vec<SimplexId> =
        ["difference_3.s", "difference_3.st", "difference_3.t", "difference_4.st", "difference_4.t"]
            .into_iter()
            .map(SimplexId::from)
            .collect();
    let z = zigzag_from_sequence(ws.schema(), &ids).map_err(|e| e.to_string())?;
    let selection = vec![Tuple(vec![Value::Int(10)]), Tuple(vec![Value::Int(20)])];
    let got = ws.run_query(&QueryInput::Zigzag(z), &SelectionSpec::Values(selection)).map_err(|e| e.to_string())?;
    let got = sorted_tuples(&got.graph);

    let mut want = Vec::new();
    for s in [10i64, 20] {
        for t in 0..100 {
            for u in 0..100 {
                if t - s == 3 && u - t == 4 {
                    want.push(Tuple(vec![Value::Int(s), Value::Int(u)]));
                }
            }
        }
    }
    ensure!(got == want, "got {got:?}, oracle {want:?}");
    let expected = vec![Tuple(vec![Value::Int(10), Value::Int(17)]), Tuple(vec![Value::Int(20), Value::Int(27)])];
    ensure!(got == expected, "got {got:?}");
    Ok("{(10,17),(20,27)}".into())
}

fn friendship() -> Outcome {
    let reg = Registry::new().with(DataType::integer("person")).unwrap();
    let schema =
        Schema::from_parts(reg, [Simplex::vertex("P", "person"), Simplex::with_faces("E", ["P", "P"])]).unwrap();
    let (p, e) = (sid("P"), sid("E"));
    let hop = [
        ZigzagStep { direction: Direction::Ascend, face: FaceMap::single(1), target: e.clone() },
        ZigzagStep { direction: Direction::Descend, face: FaceMap::single(0), target: p.clone() },
    ];
    let z = Zigzag { start: p.clone(), steps: hop.iter().cycle().take(6).cloned().collect() };
    let mut checked = 0;
    for case in 0..20u64 {
        let mut r = rng(2000 + case);
        let n = r.random_range(2..=10);
        let mut adj = vec![vec![0u64; n]; n];
        let mut rows = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if r.random_bool(0.4) {
                    adj[i][j] = 1;
                    adj[j][i] = 1;
                    rows.push(Tuple(vec![Value::Int(i as i64), Value::Int(j as i64)]));
                    rows.push(Tuple(vec![Value::Int(j as i64), Value::Int(i as i64)]));
                }
            }
        }
        let rows = rows.into_iter().enumerate().map(|(k, t)| (Key::seq(k), t)).collect();
        let sheaf = Sheaf::new(schema.clone())
            .set_tuples(&p, (0..n).map(|i| Tuple(vec![Value::Int(i as i64)])).collect())
            .and_then(|s| s.set_table(&e, rows, KeyMaps::ByValue))
            .map_err(|e| e.to_string())?;
        let mul = |a: &Vec<Vec<u64>>, b: &Vec<Vec<u64>>| -> Vec<Vec<u64>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
        };
        let cube = mul(&mul(&adj, &adj), &adj);
        for i in 0..n {
            let sel = Selection::from_keys(&sheaf, &p, &[Key::seq(i)]).map_err(|e| e.to_string())?;
            let res = evaluate(&sheaf, &z, &sel).map_err(|e| e.to_string())?;
            let reached: BTreeSet<i64> = res.graph_table(true).tuples().map(|t| t.0[1].as_int().unwrap()).collect();
            let support: BTreeSet<i64> = (0..n).filter(|&j| cube[i][j] > 0).map(|j| j as i64).collect();
            ensure!(reached == support, "case {case}, person {i}: {reached:?} versus {support:?}");
            let counts = res.graph.value_counts();
            for j in 0..n {
                let t = Tuple(vec![Value::Int(i as i64), Value::Int(j as i64)]);
                let c = counts.get(&t).copied().unwrap_or(0) as u64;
                ensure!(c == cube[i][j], "case {case}: walks {i}->{j} counted {c}, cube says {}", cube[i][j]);
            }
            checked += 1;
        }
    }
    Ok(format!("20 tables, {checked} selection rows"))
}

fn rhombus() -> Outcome {
    let d = |s: &str| Value::date(s);
    let c = |s: &str| Value::text(s);
    let interactions = [
        ("acme", "globex", "2024-03-01"),
        ("acme", "initech", "2024-03-01"),
        ("globex", "initech", "2024-03-02"),
        ("acme", "globex", "2024-03-03"),
        ("umbrella", "acme", "2024-03-02"),
        ("initech", "umbrella", "2024-03-03"),
    ];
    let creations = [("acme", "globex", "rocket"), ("acme", "globex", "anvil"), ("globex", "initech", "portal")];

    let reg = Registry::new().with(DataType::text("company")).unwrap().with(DataType::date("date")).unwrap();
    let schema = Schema::representable_named(&reg, &[("a", "company"), ("b", "company"), ("d", "date")]).unwrap();
    let rows = interactions
        .iter()
        .enumerate()
        .map(|(i, (a, b, day))| (Key::seq(i), Tuple(vec![c(a), c(b), d(day)])))
        .collect();
    let t1 = Tile::new("interactions", schema, "abd".into(), TileTable::Concrete(rows), prov()).unwrap();

    let reg = Registry::new().with(DataType::text("company")).unwrap().with(DataType::text("creation")).unwrap();
    let schema =
        Schema::representable_named(&reg, &[("a", "company"), ("b", "company"), ("x", "creation")]).unwrap();
    let rows = creations
        .iter()
        .enumerate()
        .map(|(i, (a, b, x))| (Key::seq(i), Tuple(vec![c(a), c(b), c(x)])))
        .collect();
    let t2 = Tile::new("creations", schema, "abx".into(), TileTable::Concrete(rows), prov()).unwrap();

    let ws = Workspace::new(0).drop_tile(&t1, None, None).unwrap();
    let attach = Attachment { workspace: "interactions.ab".into(), tile: "ab".into(), matching: vec![0, 1] };
    let ws = ws.drop_tile(&t2, Some(attach), Some(Policy::Universal)).map_err(|e| e.to_string())?;
    let ids: Vec<SimplexId> = ["interactions.d", "interactions.abd", "interactions.ab", "creations.abx", "creations.x"]
        .into_iter()
        .map(SimplexId::from)
        .collect();
    let z = zigzag_from_sequence(ws.schema(), &ids).map_err(|e| e.to_string())?;

    let dates: Vec<&str> = interactions.iter().map(|i| i.2).collect::<BTreeSet<_>>().into_iter().collect();
    let mut nonempty = 0;
    for mask in 0..(1u32 << dates.len()) {
        let chosen: Vec<&str> = (0..dates.len()).filter(|i| mask & (1 << i) != 0).map(|i| dates[i]).collect();
        let values = chosen.iter().map(|day| Tuple(vec![d(day)])).collect();
        let got = ws.run_query(&QueryInput::Zigzag(z.clone()), &SelectionSpec::Values(values));
        let got = sorted_tuples(&got.map_err(|e| e.to_string())?.graph);

        // join interactions and creations on (a, b)
        let mut want = Vec::new();
        for (a, b, day) in interactions.iter().filter(|i| chosen.contains(&i.2)) {
            for (ca, cb, x) in &creations {
                if (a, b) == (ca, cb) {
                    want.push(Tuple(vec![d(day), c(x)]));
                }
            }
        }
        want.sort();
        ensure!(got == want, "dates {chosen:?}: got {got:?}, join {want:?}");
        nonempty += usize::from(!want.is_empty());
    }
    Ok(format!("{} date subsets, {nonempty} with creations", 1 << dates.len()))
}

fn fiber_product_law() -> Outcome {
    let v = sid("v");
    let mut r = rng(3000);
    let table = |r: &mut Rng8| {
        let n = r.random_range(0..20);
        ConcreteTable::from_tuples(v.clone(), (0..n).map(|_| Tuple(vec![Value::Int(r.random_range(0..6))])))
    };
    for case in 0..200 {
        let a = table(&mut r);
        let b = table(&mut r);
        let fp = fiber_product(&Table::Concrete(a.clone()), &Table::Concrete(b.clone())).map_err(|e| e.to_string())?;
        let (ma, mb) = (a.value_counts(), b.value_counts());
        let want: usize = ma.iter().map(|(t, m)| m * mb.get(t).copied().unwrap_or(0)).sum();
        let got = fp.as_concrete().unwrap();
        ensure!(got.len() == want, "case {case}: {} rows, expected {want}", got.len());
    }
    for case in 0..200 {
        let pick = |r: &mut Rng8| -> Vec<i64> { (0..20).filter(|_| r.random_bool(0.5)).collect() };
        let (xa, xb) = (pick(&mut r), pick(&mut r));
        let a = ConcreteTable::from_tuples(v.clone(), xa.iter().map(|&x| Tuple(vec![Value::Int(x)])));
        let b = ConcreteTable::from_tuples(v.clone(), xb.iter().map(|&x| Tuple(vec![Value::Int(x)])));
        let fp = fiber_product(&Table::Concrete(a), &Table::Concrete(b)).map_err(|e| e.to_string())?;
        let got: Vec<i64> = fp.as_concrete().unwrap().tuples().map(|t| t.0[0].as_int().unwrap()).collect();
        let want: Vec<i64> = xa.iter().filter(|x| xb.contains(x)).copied().collect();
        let sorted: Vec<i64> = got.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        ensure!(sorted == want && got.len() == want.len(), "case {case}: {got:?} versus {want:?}");
    }
    Ok("200 multiset cases, 200 injective cases".into())
}

fn glue_fuzz() -> Outcome {
    let labels = ["p", "q"];
    let reg = Registry::new().with(DataType::integer("p")).unwrap().with(DataType::integer("q")).unwrap();
    let mut total = BTreeMap::from([("attach", 0), ("within", 0), ("disjoint", 0)]);
    let mut refused = 0;
    for run in 0..5u64 {
        let mut r = rng(4000 + run);
        let first: Vec<&str> = (0..r.random_range(1..=3)).map(|_| *labels.choose(&mut r).unwrap()).collect();
        let mut x = Schema::make_representable(&reg, &first).unwrap();
        for op in 0..100 {
            let ids: Vec<SimplexId> = x.ids().cloned().collect();
            let kind = r.random_range(0..10);
            let glued = if kind < 5 && x.len() <= 40 {
                let x1 = ids.choose(&mut r).unwrap().clone();
                let mut ls = x.slot_labels(&x1).unwrap();
                if r.random_bool(0.5) {
                    ls.push(labels.choose(&mut r).unwrap().to_string());
                }
                let perm = permutations(ls.len()).choose(&mut r).unwrap().clone();
                let placed: Vec<&str> = perm.iter().map(|&k| ls[k].as_str()).collect();
                let right = Schema::make_representable(&reg, &placed).unwrap();
                // slot k of x1 sits at position k in `placed` order under perm^-1
                let dim = x.get(&x1).unwrap().dim;
                let mut slots: Vec<usize> = (0..=dim).map(|k| perm.iter().position(|&p| p == k).unwrap()).collect();
                slots.sort();
                let x2 = Schema::representable_id(&slots);
                match label_matchings(&x, &x1, &right, &x2).choose(&mut r) {
                    Some(m) => ("attach", Schema::glue(&x, &x1, &right, &x2, &SlotMatching(m.clone()))),
                    None => continue,
                }
            } else if kind < 8 {
                let x1 = ids.choose(&mut r).unwrap().clone();
                let x2 = ids.choose(&mut r).unwrap().clone();
                match label_matchings(&x, &x1, &x, &x2).choose(&mut r) {
                    Some(m) if x1 != x2 => ("within", x.glue_within(&x1, &x2, &SlotMatching(m.clone()))),
                    _ => continue,
                }
            } else if x.len() <= 40 {
                let ls: Vec<&str> = (0..r.random_range(1..=2)).map(|_| *labels.choose(&mut r).unwrap()).collect();
                ("disjoint", Schema::disjoint_union(&x, &Schema::make_representable(&reg, &ls).unwrap()))
            } else {
                continue;
            };
            let (name, result) = glued;
            let g = match result {
                Ok(g) => g,
                // a self-glue whose re-indexing reaches back into x1 has no in-place realization
                Err(SchemaError::MatchingNotRealizable(_)) if name == "within" => {
                    refused += 1;
                    continue;
                }
                Err(e) => return Err(format!("run {run} op {op} ({name}) rejected a label-compatible glue: {e}")),
            };
            x = g.schema;
            *total.get_mut(name).unwrap() += 1;
            let report = x.validate();
            ensure!(report.is_empty(), "run {run} op {op} ({name}): {report:?}");
            let rebuilt = x.reassemble().map_err(|e| format!("run {run} op {op}: {e}"))?;
            ensure!(is_isomorphic(&rebuilt, &x), "run {run} op {op} ({name}): reassembly not isomorphic");
        }
    }
    Ok(format!("5 runs of 100 operations, applied {total:?}, {refused} unrealizable self-glues refused"))
}

/// Lowest-dimensional region containing `p` for the straight triangle
/// A=(0,0), B=(1,0), C=(0,1), ties to the lowest id.
fn triangle_oracle(p: Point, eps: f64) -> Option<&'static str> {
    let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
    let d2 = |u: Point, v: Point| ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)).sqrt();
    let seg = |u: Point, v: Point| {
        let (dx, dy) = (v[0] - u[0], v[1] - u[1]);
        let t = (((p[0] - u[0]) * dx + (p[1] - u[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        d2(p, [u[0] + t * dx, u[1] + t * dy])
    };
    for (id, v) in [("A", a), ("B", b), ("C", c)] {
        if d2(p, v) <= eps {
            return Some(id);
        }
    }
    for (id, u, v) in [("AB", a, b), ("AC", a, c), ("BC", b, c)] {
        if seg(u, v) <= eps {
            return Some(id);
        }
    }
    (p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0).then_some("ABC")
}

fn resample(poly: &[Point], h: f64) -> Vec<Point> {
    let mut out = vec![poly[0]];
    let mut cum = vec![0.0];
    for w in poly.windows(2) {
        cum.push(cum.last().unwrap() + ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt());
    }
    let total = *cum.last().unwrap();
    let mut k = 1;
    while k as f64 * h <= total {
        let s = k as f64 * h;
        let i = cum.iter().rposition(|&c| c <= s).unwrap().min(poly.len() - 2);
        let f = (s - cum[i]) / (cum[i + 1] - cum[i]);
        out.push([poly[i][0] + f * (poly[i + 1][0] - poly[i][0]), poly[i][1] + f * (poly[i + 1][1] - poly[i][1])]);
        k += 1;
    }
    out.push(*poly.last().unwrap());
    out
}

fn curve_conversion() -> Outcome {
    let reg = Registry::new().with(DataType::integer("v")).unwrap();
    let schema = Schema::representable_named(&reg, &[("A", "v"), ("B", "v"), ("C", "v")]).unwrap();
    let corners = [("A", [0.0, 0.0]), ("B", [1.0, 0.0]), ("C", [0.0, 1.0])];
    let layout = Layout::from_points(0, corners.iter().map(|(id, p)| (sid(id), *p)));
    let eps = layout.epsilon();
    ensure!((eps - 0.02).abs() < 1e-12, "epsilon {eps}");
    let incident = |a: &SimplexId, b: &SimplexId| {
        !schema.face_maps_between(a, b).unwrap().is_empty() || !schema.face_maps_between(b, a).unwrap().is_empty()
    };
    let mut bridges = 0;
    for case in 0..50u64 {
        let mut r = rng(5000 + case);
        let (start_id, v) = corners[r.random_range(0..3)];
        let (rad, ang) = (r.random_range(0.0..0.9 * eps), r.random_range(0.0..std::f64::consts::TAU));
        let start = [v[0] + rad * ang.cos(), v[1] + rad * ang.sin()];
        let (u, w) = [(0, 1), (0, 2), (1, 2)][r.random_range(0..3)];
        let (pu, pw) = (corners[u].1, corners[w].1);
        let t = r.random_range(0.25..0.75);
        let len = ((pw[0] - pu[0]).powi(2) + (pw[1] - pu[1]).powi(2)).sqrt();
        let normal = [-(pw[1] - pu[1]) / len, (pw[0] - pu[0]) / len];
        let off = r.random_range(-0.8 * eps..0.8 * eps);
        let end = [pu[0] + t * (pw[0] - pu[0]) + off * normal[0], pu[1] + t * (pw[1] - pu[1]) + off * normal[1]];
        let mut poly = vec![start];
        for _ in 0..r.random_range(0..=2) {
            // barycentric coordinates of at least 0.1 each
            let w: [f64; 3] = [r.random(), r.random(), r.random()];
            let sum = w.iter().sum::<f64>().max(1e-9);
            let l = w.map(|x| 0.1 + 0.7 * x / sum);
            poly.push([l[1], l[2]]);
        }
        poly.push(end);

        let z = curve_to_zigzag(&schema, &layout, &poly).map_err(|e| format!("case {case}: {e}"))?;
        z.validate(&schema).map_err(|e| format!("case {case}: {e}"))?;
        let ids = z.simplices();

        let mut oracle: Vec<SimplexId> = Vec::new();
        for p in resample(&poly, eps / 2.0) {
            if let Some(id) = triangle_oracle(p, eps) {
                if oracle.last().map(|l| l.as_str()) != Some(id) {
                    oracle.push(sid(id));
                }
            }
        }
        let edge_id = format!("{}{}", corners[u].0, corners[w].0);
        ensure!(ids[0].as_str() == start_id, "case {case}: starts at {}", ids[0]);
        ensure!(ids.last().unwrap().as_str() == edge_id, "case {case}: ends at {}", ids.last().unwrap());
        // the oracle sequence, with bridges only between non-incident neighbours
        let mut j = 0;
        for id in &ids {
            if j < oracle.len() && id == &oracle[j] {
                j += 1;
                continue;
            }
            ensure!(
                j > 0 && j < oracle.len() && !incident(&oracle[j - 1], &oracle[j]),
                "case {case}: unexpected {id} in {ids:?} against oracle {oracle:?}"
            );
            ensure!(
                incident(id, &oracle[j - 1]) && incident(id, &oracle[j]),
                "case {case}: bridge {id} does not connect {} and {}",
                oracle[j - 1],
                oracle[j]
            );
            bridges += 1;
        }
        ensure!(j == oracle.len(), "case {case}: {ids:?} misses part of oracle {oracle:?}");

        let mut fine = poly.clone();
        for _ in 0..2 {
            fine = fine
                .windows(2)
                .flat_map(|w| [w[0], [(w[0][0] + w[1][0]) / 2.0, (w[0][1] + w[1][1]) / 2.0]])
                .chain(std::iter::once(*fine.last().unwrap()))
                .collect();
        }
        let refined = curve_to_zigzag(&schema, &layout, &fine).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(refined == z, "case {case}: refinement changed the zigzag");
    }
    Ok(format!("50 polylines, {bridges} bridges"))
}

fn persistence() -> Outcome {
    let mut ops = 0;
    for case in 0..50u64 {
        let mut r = rng(6000 + case);
        let (ws, applied) = loop {
            let n = r.random_range(1..=5);
            let (ws, applied) = random_workspace(&mut r, n);
            if applied > 0 {
                break (ws, applied);
            }
        };
        ops += applied;
        let first = ws.save();
        let loaded = Workspace::load(&first).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(loaded == ws, "case {case}: load differs from saved workspace");
        ensure!(loaded.save() == first, "case {case}: second save not byte-identical");
        let replayed = Workspace::replay(ws.seed(), ws.log()).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(replayed == ws, "case {case}: replay differs");
    }
    Ok(format!("50 workspaces, {ops} operations"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("zigzag evaluation matches the consistent-tuple oracle", zigzag_oracle),
        ("odometer", odometer),
        ("friendship three hops", friendship),
        ("rhombus query", rhombus),
        ("fiber product law", fiber_product_law),
        ("simplicial identities and colimit reconstruction", glue_fuzz),
        ("curve conversion", curve_conversion),
        ("persistence", persistence),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
