//! Geometric realization: standard simplices, a deterministic planar layout,
//! point location and the conversion of drawn curves into zigzags.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::query::{zigzag_from_sequence_with, Zigzag};
use crate::schema::{FaceMap, Schema, SimplexId};

pub type Point = [f64; 2];

/// Force-directed iterations.
pub const ITERATIONS: usize = 500;
/// Ideal edge length of the layout.
pub const IDEAL_EDGE: f64 = 1.0;
/// Vertex radius and edge half-width, as a fraction of the layout scale.
pub const EPSILON_FRACTION: f64 = 0.02;
/// Barycentric tolerance.
pub const TOLERANCE: f64 = 1e-9;

const CURVE_SEGMENTS: usize = 32;

/// Δⁿ: non-negative coordinate vectors of length n+1 summing to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StandardSimplex {
    n: usize,
}

impl StandardSimplex {
    pub fn new(n: i64) -> Result<Self, LayoutError> {
        usize::try_from(n).map(|n| StandardSimplex { n }).map_err(|_| LayoutError::NegativeDimension(n))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n + 1
            && x.iter().all(|v| v.is_finite() && *v >= -TOLERANCE)
            && (x.iter().sum::<f64>() - 1.0).abs() <= TOLERANCE
    }

    /// The k-th unit vector.
    pub fn vertex(&self, k: usize) -> Vec<f64> {
        (0..=self.n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()
    }
}

/// A point of a simplex in barycentric coordinates (one per vertex slot).
#[derive(Clone, Debug, PartialEq)]
pub struct Barycentric {
    pub simplex: SimplexId,
    pub coords: Vec<f64>,
}

impl Barycentric {
    pub fn new(simplex: SimplexId, coords: Vec<f64>) -> Result<Self, LayoutError> {
        let ok = !coords.is_empty()
            && StandardSimplex { n: coords.len() - 1 }.contains(&coords);
        if !ok {
            return Err(LayoutError::NotBarycentric(coords));
        }
        Ok(Barycentric { simplex, coords })
    }

    /// Position in the layout (straight-line embedding of the slots).
    pub fn to_point(&self, schema: &Schema, layout: &Layout) -> Result<Point, LayoutError> {
        let slots = schema.vertex_slots(&self.simplex)?;
        if slots.len() != self.coords.len() {
            return Err(LayoutError::NotBarycentric(self.coords.clone()));
        }
        let mut p = [0.0, 0.0];
        for (v, c) in slots.iter().zip(&self.coords) {
            let q = layout.point(v).ok_or_else(|| crate::error::SchemaError::UnknownSimplex(v.clone()))?;
            p[0] += c * q[0];
            p[1] += c * q[1];
        }
        Ok(p)
    }
}

/// Vertex positions in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub seed: u64,
    pub points: BTreeMap<SimplexId, Point>,
}

impl Layout {
    pub fn from_points(seed: u64, points: impl IntoIterator<Item = (SimplexId, Point)>) -> Self {
        Layout { seed, points: points.into_iter().collect() }
    }

    pub fn point(&self, v: &SimplexId) -> Option<Point> {
        self.points.get(v).copied()
    }

    /// The larger bounding-box side, at least one.
    pub fn scale(&self) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in self.points.values() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0)
    }

    pub fn epsilon(&self) -> f64 {
        EPSILON_FRACTION * self.scale()
    }
}

/// Seeded force-directed layout: unit ideal edge length, a fixed number of
/// iterations with linear cooling, centred on the centroid.
pub fn layout_schema(schema: &Schema, seed: u64) -> Layout {
    let ids: Vec<SimplexId> = schema.vertices().map(|v| v.id.clone()).collect();
    let n = ids.len();
    let pos_of: BTreeMap<&SimplexId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let mut edges = std::collections::BTreeSet::new();
    for s in schema.simplices() {
        if s.dim == 0 {
            continue;
        }
        let Ok(slots) = schema.vertex_slots(&s.id) else { continue };
        for a in 0..slots.len() {
            for b in a + 1..slots.len() {
                let (u, v) = (pos_of[&slots[a]], pos_of[&slots[b]]);
                if u != v {
                    edges.insert((u.min(v), u.max(v)));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (n as f64).sqrt().max(1.0);
    let mut pos: Vec<Point> = (0..n).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();
    let k = IDEAL_EDGE;
    let t0 = 0.1 * side + 0.5;
    for it in 0..ITERATIONS {
        let temp = t0 * (1.0 - it as f64 / ITERATIONS as f64);
        let mut disp = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy, d) = separation(pos[i], pos[j], i, j);
                let f = k * k / d;
                disp[i][0] += dx / d * f;
                disp[i][1] += dy / d * f;
                disp[j][0] -= dx / d * f;
                disp[j][1] -= dy / d * f;
            }
        }
        for &(i, j) in &edges {
            let (dx, dy, d) = separation(pos[i], pos[j], i, j);
            let f = d * d / k;
            disp[i][0] -= dx / d * f;
            disp[i][1] -= dy / d * f;
            disp[j][0] += dx / d * f;
            disp[j][1] += dy / d * f;
        }
        for i in 0..n {
            let len = (disp[i][0] * disp[i][0] + disp[i][1] * disp[i][1]).sqrt();
            if len > 0.0 {
                let step = len.min(temp);
                pos[i][0] += disp[i][0] / len * step;
                pos[i][1] += disp[i][1] / len * step;
            }
        }
    }
    if n > 0 {
        let cx = pos.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let cy = pos.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        for p in &mut pos {
            p[0] -= cx;
            p[1] -= cy;
        }
    }
    Layout { seed, points: ids.into_iter().zip(pos).collect() }
}

/// Difference vector and distance, never zero: coincident points are pushed
/// apart along a direction fixed by their indices.
fn separation(p: Point, q: Point, i: usize, j: usize) -> (f64, f64, f64) {
    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
    let d = (dx * dx + dy * dy).sqrt();
    if d > 1e-9 {
        (dx, dy, d)
    } else {
        let angle = (i * 31 + j * 17) as f64;
        (angle.cos() * 1e-3, angle.sin() * 1e-3, 1e-3)
    }
}

fn dist(p: Point, q: Point) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn lerp(p: Point, q: Point, t: f64) -> Point {
    [p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t]
}

/// Closest point parameter on segment `a`..`b` and the distance to it.
fn segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let (vx, vy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2).clamp(0.0, 1.0) };
    (t, dist(p, lerp(a, b, t)))
}

/// Polyline distance and arclength fraction of the nearest point.
fn polyline_distance(p: Point, path: &[Point]) -> (f64, f64) {
    if path.len() == 1 {
        return (0.0, dist(p, path[0]));
    }
    let total: f64 = path.windows(2).map(|w| dist(w[0], w[1])).sum();
    let mut best = (0.0, f64::INFINITY);
    let mut walked = 0.0;
    for w in path.windows(2) {
        let seg = dist(w[0], w[1]);
        let (t, d) = segment_distance(p, w[0], w[1]);
        if d < best.1 {
            let frac = if total > 0.0 { (walked + t * seg) / total } else { 0.0 };
            best = (frac, d);
        }
        walked += seg;
    }
    best
}

fn in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let cross = |o: Point, u: Point, v: Point| (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
    let area = cross(a, b, c);
    if area.abs() < 1e-12 {
        return false;
    }
    let (d1, d2, d3) = (cross(a, b, p), cross(b, c, p), cross(c, a, p));
    let s = area.signum();
    d1 * s >= 0.0 && d2 * s >= 0.0 && d3 * s >= 0.0
}

/// Display regions of every simplex of dimension at most two.
#[derive(Clone, Debug)]
pub struct Realization {
    epsilon: f64,
    vertices: BTreeMap<SimplexId, Point>,
    /// Edge paths, from the slot-0 end to the slot-1 end.
    edges: BTreeMap<SimplexId, Vec<Point>>,
    triangles: BTreeMap<SimplexId, [Point; 3]>,
    slots: BTreeMap<SimplexId, Vec<SimplexId>>,
}

impl Realization {
    pub fn new(schema: &Schema, layout: &Layout) -> Result<Self, LayoutError> {
        let epsilon = layout.epsilon();
        let mut vertices = BTreeMap::new();
        let mut slots = BTreeMap::new();
        for s in schema.simplices() {
            let sl = schema.vertex_slots(&s.id)?;
            for v in &sl {
                if !layout.points.contains_key(v) {
                    return Err(crate::error::SchemaError::UnknownSimplex(v.clone()).into());
                }
            }
            if s.dim == 0 {
                vertices.insert(s.id.clone(), layout.points[&s.id]);
            }
            slots.insert(s.id.clone(), sl);
        }

        // parallel edges share a vertex pair; loops share a vertex
        let mut groups: BTreeMap<(SimplexId, SimplexId), Vec<SimplexId>> = BTreeMap::new();
        for s in schema.simplices().filter(|s| s.dim == 1) {
            let sl = &slots[&s.id];
            let key = if sl[0] <= sl[1] { (sl[0].clone(), sl[1].clone()) } else { (sl[1].clone(), sl[0].clone()) };
            groups.entry(key).or_default().push(s.id.clone());
        }
        let mut neighbours: BTreeMap<SimplexId, Vec<Point>> = BTreeMap::new();
        for (u, v) in groups.keys() {
            if u != v {
                neighbours.entry(u.clone()).or_default().push(layout.points[v]);
                neighbours.entry(v.clone()).or_default().push(layout.points[u]);
            }
        }
        let mut edges = BTreeMap::new();
        for ((u, v), members) in &groups {
            for (k, id) in members.iter().enumerate() {
                let path = if u == v {
                    loop_path(layout.points[u], neighbours.get(u).map(Vec::as_slice).unwrap_or(&[]), k)
                } else {
                    let canonical = arc_path(layout.points[u], layout.points[v], k);
                    if slots[id][0] == *u {
                        canonical
                    } else {
                        canonical.into_iter().rev().collect()
                    }
                };
                edges.insert(id.clone(), path);
            }
        }
        let mut triangles = BTreeMap::new();
        for s in schema.simplices().filter(|s| s.dim == 2) {
            let sl = &slots[&s.id];
            triangles.insert(s.id.clone(), [layout.points[&sl[0]], layout.points[&sl[1]], layout.points[&sl[2]]]);
        }
        Ok(Realization { epsilon, vertices, edges, triangles, slots })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn edge_path(&self, id: &SimplexId) -> Option<&[Point]> {
        self.edges.get(id).map(Vec::as_slice)
    }

    pub fn edge_paths(&self) -> &BTreeMap<SimplexId, Vec<Point>> {
        &self.edges
    }

    /// Whether `p` lies in the region of `id`, ignoring other simplices.
    pub fn in_region(&self, id: &SimplexId, p: Point) -> bool {
        if let Some(v) = self.vertices.get(id) {
            return dist(p, *v) <= self.epsilon;
        }
        if let Some(path) = self.edges.get(id) {
            return polyline_distance(p, path).1 <= self.epsilon;
        }
        if let Some([a, b, c]) = self.triangles.get(id) {
            return in_triangle(p, *a, *b, *c);
        }
        false
    }

    /// The lowest-dimensional simplex whose region contains `p`; ties go to
    /// the lowest id.
    pub fn locate(&self, p: Point) -> Option<SimplexId> {
        if let Some((id, _)) = self.vertices.iter().find(|(_, v)| dist(p, **v) <= self.epsilon) {
            return Some(id.clone());
        }
        if let Some((id, _)) = self.edges.iter().find(|(_, path)| polyline_distance(p, path).1 <= self.epsilon) {
            return Some(id.clone());
        }
        self.triangles
            .iter()
            .find(|(_, [a, b, c])| in_triangle(p, *a, *b, *c))
            .map(|(id, _)| id.clone())
    }
}

/// Straight for the first edge between two vertices, then alternating bulges.
fn arc_path(a: Point, b: Point, k: usize) -> Vec<Point> {
    if k == 0 {
        return vec![a, b];
    }
    let len = dist(a, b).max(1e-9);
    let normal = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let offset = 0.25 * k.div_ceil(2) as f64 * sign * len;
    let mid = lerp(a, b, 0.5);
    let ctrl = [mid[0] + normal[0] * offset * 2.0, mid[1] + normal[1] * offset * 2.0];
    (0..=CURVE_SEGMENTS)
        .map(|i| {
            let t = i as f64 / CURVE_SEGMENTS as f64;
            let u = 1.0 - t;
            [
                u * u * a[0] + 2.0 * u * t * ctrl[0] + t * t * b[0],
                u * u * a[1] + 2.0 * u * t * ctrl[1] + t * t * b[1],
            ]
        })
        .collect()
}

/// A circle through the vertex, on the side away from its neighbours.
fn loop_path(v: Point, neighbours: &[Point], k: usize) -> Vec<Point> {
    let mut dir = [0.0, 1.0];
    if !neighbours.is_empty() {
        let cx = neighbours.iter().map(|p| p[0]).sum::<f64>() / neighbours.len() as f64;
        let cy = neighbours.iter().map(|p| p[1]).sum::<f64>() / neighbours.len() as f64;
        let (dx, dy) = (v[0] - cx, v[1] - cy);
        let len = (dx * dx + dy * dy).sqrt();
        if len > 1e-9 {
            dir = [dx / len, dy / len];
        }
    }
    let r = 0.3 * (k + 1) as f64;
    let centre = [v[0] + dir[0] * r, v[1] + dir[1] * r];
    let start = (v[1] - centre[1]).atan2(v[0] - centre[0]);
    (0..=CURVE_SEGMENTS)
        .map(|i| {
            let a = start + std::f64::consts::TAU * i as f64 / CURVE_SEGMENTS as f64;
            [centre[0] + r * a.cos(), centre[1] + r * a.sin()]
        })
        .collect()
}

pub fn locate_point(schema: &Schema, layout: &Layout, p: Point) -> Result<Option<SimplexId>, LayoutError> {
    Ok(Realization::new(schema, layout)?.locate(p))
}

/// Points at arclength steps of `h` along the polyline, plus its last point.
pub fn sample_polyline(points: &[Point], h: f64) -> Vec<Point> {
    let mut out = vec![points[0]];
    let mut next = h;
    let mut walked = 0.0;
    for w in points.windows(2) {
        let seg = dist(w[0], w[1]);
        while seg > 0.0 && next <= walked + seg {
            out.push(lerp(w[0], w[1], (next - walked) / seg));
            next += h;
        }
        walked += seg;
    }
    let last = *points.last().expect("non-empty");
    if dist(*out.last().expect("non-empty"), last) > 1e-12 {
        out.push(last);
    }
    out
}

struct Run {
    id: SimplexId,
    first: Point,
    last: Point,
    /// All sample points located in this run.
    samples: Vec<Point>,
}

/// Reads a drawn curve as a zigzag: sample, locate, drop short excursions
/// outside the schema, bridge corner crossings, and pick face maps from the
/// geometry.
pub fn curve_to_zigzag(schema: &Schema, layout: &Layout, polyline: &[Point]) -> Result<Zigzag, LayoutError> {
    if polyline.is_empty() {
        return Err(LayoutError::EmptyPolyline);
    }
    if polyline.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(LayoutError::NonFinite);
    }
    let real = Realization::new(schema, layout)?;
    let eps = real.epsilon();
    let h = eps / 2.0;
    let samples = sample_polyline(polyline, h);
    let located: Vec<Option<SimplexId>> = samples.iter().map(|p| real.locate(*p)).collect();
    if located[0].is_none() {
        return Err(LayoutError::OutsideStart("start"));
    }
    if located.last().expect("sample").is_none() {
        return Err(LayoutError::OutsideStart("end"));
    }

    let mut runs: Vec<Run> = Vec::new();
    let mut gap = 0usize;
    for (p, loc) in samples.iter().zip(&located) {
        match loc {
            None => gap += 1,
            Some(id) => {
                if gap > 0 {
                    let length = gap as f64 * h;
                    if length >= eps {
                        return Err(LayoutError::Gap { length, guard: eps, x: p[0], y: p[1] });
                    }
                    gap = 0;
                }
                match runs.last_mut() {
                    Some(r) if &r.id == id => {
                        r.last = *p;
                        r.samples.push(*p);
                    }
                    _ => runs.push(Run { id: id.clone(), first: *p, last: *p, samples: vec![*p] }),
                }
            }
        }
    }

    let incident = |a: &SimplexId, b: &SimplexId| -> Result<bool, LayoutError> {
        Ok(!schema.face_maps_between(a, b)?.is_empty() || !schema.face_maps_between(b, a)?.is_empty())
    };

    // sequence of (simplex, sample points near its entry and exit)
    let mut seq: Vec<Run> = Vec::new();
    for run in runs {
        if let Some(prev) = seq.last() {
            if !incident(&prev.id, &run.id)? {
                let mid = lerp(prev.last, run.first, 0.5);
                let bridge = bridge(schema, &real, &prev.id, &run.id, mid)?;
                seq.push(Run { id: bridge, first: mid, last: mid, samples: vec![mid] });
            }
        }
        seq.push(run);
    }

    let ids: Vec<SimplexId> = seq.iter().map(|r| r.id.clone()).collect();
    let mut overrides = Vec::new();
    for w in seq.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let da = schema.get(&a.id)?.dim;
        let db = schema.get(&b.id)?.dim;
        let (big, small, near) = if da > db { (a, b, a.last) } else { (b, a, b.first) };
        let options = schema.face_maps_between(&big.id, &small.id)?;
        let chosen = if options.len() <= 1 {
            None
        } else {
            Some(pick_face(schema, layout, &real, &big.id, &options, near)?)
        };
        overrides.push(chosen);
    }
    Ok(zigzag_from_sequence_with(schema, &ids, &overrides)?)
}

/// A simplex connecting two non-incident located simplices: a common coface
/// containing the crossing point, else a common face.
fn bridge(
    schema: &Schema,
    real: &Realization,
    a: &SimplexId,
    b: &SimplexId,
    mid: Point,
) -> Result<SimplexId, LayoutError> {
    let up_a: std::collections::BTreeSet<SimplexId> = schema
        .simplices()
        .filter(|s| s.dim <= 2 && !schema.face_maps_between(&s.id, a).map(|v| v.is_empty()).unwrap_or(true))
        .map(|s| s.id.clone())
        .collect();
    for s in &up_a {
        if !schema.face_maps_between(s, b)?.is_empty() && real.in_region(s, mid) {
            return Ok(s.clone());
        }
    }
    let closure_a = schema.closure(a)?;
    let closure_b = schema.closure(b)?;
    let mut common: Vec<&SimplexId> = closure_a.intersection(&closure_b).collect();
    common.sort_by_key(|id| (std::cmp::Reverse(schema.get(id).map(|s| s.dim).unwrap_or(0)), (*id).clone()));
    common
        .first()
        .map(|id| (*id).clone())
        .ok_or_else(|| LayoutError::NotIncident(a.clone(), b.clone()))
}

/// Chooses among several face maps from `big` onto the same face by the
/// position where the curve crosses between them.
fn pick_face(
    schema: &Schema,
    layout: &Layout,
    real: &Realization,
    big: &SimplexId,
    options: &[FaceMap],
    near: Point,
) -> Result<FaceMap, LayoutError> {
    let dim = schema.get(big)?.dim;
    if dim == 1 {
        if let Some(path) = real.edge_path(big) {
            let (t, _) = polyline_distance(near, path);
            // the slot-0 end remains after deleting slot 1
            let want = if t < 0.5 { FaceMap::single(1) } else { FaceMap::single(0) };
            if options.contains(&want) {
                return Ok(want);
            }
        }
        return Ok(options[0].clone());
    }
    let slots = real.slots.get(big).cloned().unwrap_or_default();
    let mut best = (f64::INFINITY, options[0].clone());
    for fm in options {
        let kept: Vec<Point> = fm.retained(dim).iter().filter_map(|&s| layout.point(&slots[s])).collect();
        let d = match kept.as_slice() {
            [p] => dist(near, *p),
            [p, q] => segment_distance(near, *p, *q).1,
            _ => f64::INFINITY,
        };
        if d < best.0 {
            best = (d, fm.clone());
        }
    }
    Ok(best.1)
}

/// Layout export consumed by the workbench.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub seed: u64,
    pub scale: f64,
    pub epsilon: f64,
    pub points: BTreeMap<SimplexId, Point>,
    pub edges: BTreeMap<SimplexId, Vec<Point>>,
    pub triangles: BTreeMap<SimplexId, [SimplexId; 3]>,
    /// Simplices of dimension three or more, drawn as their 1-skeleton.
    pub skeletal: BTreeMap<SimplexId, Vec<SimplexId>>,
}

pub fn layout_document(schema: &Schema, layout: &Layout) -> Result<LayoutDocument, LayoutError> {
    let real = Realization::new(schema, layout)?;
    let mut triangles = BTreeMap::new();
    let mut skeletal = BTreeMap::new();
    for s in schema.simplices() {
        let slots = real.slots[&s.id].clone();
        match s.dim {
            2 => {
                triangles.insert(s.id.clone(), [slots[0].clone(), slots[1].clone(), slots[2].clone()]);
            }
            d if d >= 3 => {
                skeletal.insert(s.id.clone(), slots);
            }
            _ => {}
        }
    }
    Ok(LayoutDocument {
        seed: layout.seed,
        scale: layout.scale(),
        epsilon: layout.epsilon(),
        points: layout.points.clone(),
        edges: real.edges.clone(),
        triangles,
        skeletal,
    })
}
