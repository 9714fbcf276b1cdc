//! Layered rectangular geometry and its structured triangulation.
//!
//! A domain is a union of axis-aligned rectangles (one per material layer).
//! Shared edges become interface segments, the rest of each rectangle's
//! boundary becomes exterior segments. Coordinates are compared exactly:
//! two layers touch only if the touching coordinates are bit-identical.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("domain has no layers")]
    Empty,
    #[error("layer {index} is degenerate or non-finite (need x0 < x1 and y0 < y1)")]
    DegenerateLayer { index: usize },
    #[error("layers {first} and {second} overlap")]
    OverlappingLayers { first: usize, second: usize },
    #[error("domain is not edge-connected ({components} components)")]
    DisconnectedDomain { components: usize },
    #[error("interfaces cross at ({x}, {y})")]
    CrossPoint { x: f64, y: f64 },
    #[error("mesh size must be positive and finite, got {0}")]
    InvalidMeshSize(f64),
}

/// One material layer occupying `[x0, x1] × [y0, y1]` (metres).
#[derive(Clone, Debug, PartialEq)]
pub struct LayerRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub material: String,
}

impl LayerRect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, material: impl Into<String>) -> Self {
        Self {
            x0,
            y0,
            x1,
            y1,
            material: material.into(),
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.x0, self.y0],
            [self.x1, self.y0],
            [self.x1, self.y1],
            [self.x0, self.y1],
        ]
    }

    fn contains_strictly(&self, p: [f64; 2]) -> bool {
        self.x0 < p[0] && p[0] < self.x1 && self.y0 < p[1] && p[1] < self.y1
    }

    /// Interior angle of this rectangle at `p`, in quarter turns:
    /// 1 at a corner, 2 on an edge, 4 inside, 0 outside.
    pub fn quarter_turns_at(&self, p: [f64; 2]) -> u8 {
        let on_x = p[0] == self.x0 || p[0] == self.x1;
        let on_y = p[1] == self.y0 || p[1] == self.y1;
        let in_x = self.x0 <= p[0] && p[0] <= self.x1;
        let in_y = self.y0 <= p[1] && p[1] <= self.y1;
        if !(in_x && in_y) {
            0
        } else if on_x && on_y {
            1
        } else if on_x || on_y {
            2
        } else {
            4
        }
    }
}

/// Outward direction of an exterior segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    South,
    North,
    West,
    East,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::South, Side::North, Side::West, Side::East];

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::South => [0.0, -1.0],
            Side::North => [0.0, 1.0],
            Side::West => [-1.0, 0.0],
            Side::East => [1.0, 0.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::South => "south",
            Side::North => "north",
            Side::West => "west",
            Side::East => "east",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == s)
    }

    fn is_vertical(self) -> bool {
        matches!(self, Side::West | Side::East)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A straight piece of Γ_{mℓ} shared by exactly two layers.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceSegment {
    pub layers: [usize; 2],
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// A maximal piece of one layer side that lies on the exterior boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorSegment {
    pub layer: usize,
    pub side: Side,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

fn on_axis_segment(start: [f64; 2], end: [f64; 2], p: [f64; 2]) -> bool {
    if start[0] == end[0] {
        p[0] == start[0] && start[1] <= p[1] && p[1] <= end[1]
    } else {
        p[1] == start[1] && start[0] <= p[0] && p[0] <= end[0]
    }
}

impl InterfaceSegment {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        on_axis_segment(self.start, self.end, p)
    }

    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]) + (self.end[1] - self.start[1])
    }
}

impl ExteriorSegment {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        on_axis_segment(self.start, self.end, p)
    }

    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]) + (self.end[1] - self.start[1])
    }
}

/// Union of rectangular layers with derived interface and exterior segments.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredDomain {
    pub layers: Vec<LayerRect>,
    pub interfaces: Vec<InterfaceSegment>,
    pub exterior: Vec<ExteriorSegment>,
}

/// Validated construction: rejects overlaps, disconnected unions and
/// interface cross points.
pub fn build_domain(layers: Vec<LayerRect>) -> Result<LayeredDomain, DomainError> {
    let domain = LayeredDomain::unchecked(layers)?;
    if let Some((first, second)) = domain.first_overlap() {
        return Err(DomainError::OverlappingLayers { first, second });
    }
    let components = domain.component_count();
    if components != 1 {
        return Err(DomainError::DisconnectedDomain { components });
    }
    if let Some(p) = domain.cross_points().first() {
        return Err(DomainError::CrossPoint { x: p[0], y: p[1] });
    }
    Ok(domain)
}

impl LayeredDomain {
    /// Derives segments without the topological checks of [`build_domain`].
    /// Only empty input and degenerate rectangles are rejected; use
    /// [`admissibility_report`] to inspect the result.
    pub fn unchecked(layers: Vec<LayerRect>) -> Result<Self, DomainError> {
        if layers.is_empty() {
            return Err(DomainError::Empty);
        }
        if let Some(index) = layers.iter().position(|l| !l.is_valid()) {
            return Err(DomainError::DegenerateLayer { index });
        }
        let interfaces = derive_interfaces(&layers);
        let exterior = derive_exterior(&layers, &interfaces);
        Ok(Self {
            layers,
            interfaces,
            exterior,
        })
    }

    pub fn area(&self) -> f64 {
        self.layers.iter().map(LayerRect::area).sum()
    }

    fn first_overlap(&self) -> Option<(usize, usize)> {
        let n = self.layers.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.layers[i], &self.layers[j]);
                if a.x0.max(b.x0) < a.x1.min(b.x1) && a.y0.max(b.y0) < a.y1.min(b.y1) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn component_count(&self) -> usize {
        let n = self.layers.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for seg in &self.interfaces {
            let a = find(&mut parent, seg.layers[0]);
            let b = find(&mut parent, seg.layers[1]);
            if a != b {
                parent[a] = b;
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Points lying on three or more interface segments.
    pub fn cross_points(&self) -> Vec<[f64; 2]> {
        let mut out: Vec<[f64; 2]> = Vec::new();
        for p in self.interface_endpoints() {
            let count = self.interfaces.iter().filter(|s| s.contains(p)).count();
            if count >= 3 {
                out.push(p);
            }
        }
        out
    }

    fn interface_endpoints(&self) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = self
            .interfaces
            .iter()
            .flat_map(|s| [s.start, s.end])
            .collect();
        sort_dedup_points(&mut pts);
        pts
    }

    /// Total interior angle of the union at `p`, in quarter turns.
    pub fn quarter_turns_at(&self, p: [f64; 2]) -> u8 {
        self.layers.iter().map(|l| l.quarter_turns_at(p)).sum()
    }

    /// Points of the exterior boundary that need a corner analysis: points
    /// where an interface meets the exterior boundary, and convex corners of
    /// a single layer.
    pub fn boundary_corners(&self) -> Vec<BoundaryCorner> {
        let mut out = Vec::new();
        for p in self.interface_endpoints() {
            let total = self.quarter_turns_at(p);
            if total >= 4 {
                continue;
            }
            let incident: Vec<(usize, u8)> = self
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| (i, l.quarter_turns_at(p)))
                .filter(|&(_, q)| q > 0)
                .collect();
            if incident.len() == 2 {
                out.push(BoundaryCorner {
                    point: p,
                    kind: CornerKind::Interface {
                        layers: [incident[0].0, incident[1].0],
                        quarter_turns: [incident[0].1, incident[1].1],
                    },
                });
            }
        }
        let mut corners: Vec<[f64; 2]> = self.layers.iter().flat_map(|l| l.corners()).collect();
        sort_dedup_points(&mut corners);
        for p in corners {
            if self.interfaces.iter().any(|s| s.contains(p)) {
                continue;
            }
            let incident: Vec<(usize, u8)> = self
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| (i, l.quarter_turns_at(p)))
                .filter(|&(_, q)| q > 0)
                .collect();
            if incident.len() == 1 && incident[0].1 == 1 {
                out.push(BoundaryCorner {
                    point: p,
                    kind: CornerKind::Exterior {
                        layer: incident[0].0,
                        quarter_turns: 1,
                    },
                });
            }
        }
        out
    }
}

/// A point on the exterior boundary relevant for corner regularity.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCorner {
    pub point: [f64; 2],
    pub kind: CornerKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CornerKind {
    /// An interface endpoint on ∂Ω with the angles of both layers there.
    Interface {
        layers: [usize; 2],
        quarter_turns: [u8; 2],
    },
    /// A corner of the exterior boundary touched by one layer only.
    Exterior { layer: usize, quarter_turns: u8 },
}

pub fn quarter_turns_to_radians(q: u8) -> f64 {
    f64::from(q) * FRAC_PI_2
}

fn sort_dedup_points(pts: &mut Vec<[f64; 2]>) {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
}

fn derive_interfaces(layers: &[LayerRect]) -> Vec<InterfaceSegment> {
    let mut out = Vec::new();
    let n = layers.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&layers[i], &layers[j]);
            // vertical contact
            for x in [a.x1, a.x0] {
                if (x == a.x1 && x == b.x0) || (x == a.x0 && x == b.x1) {
                    let lo = a.y0.max(b.y0);
                    let hi = a.y1.min(b.y1);
                    if lo < hi {
                        out.push(InterfaceSegment {
                            layers: [i, j],
                            start: [x, lo],
                            end: [x, hi],
                        });
                    }
                }
            }
            // horizontal contact
            for y in [a.y1, a.y0] {
                if (y == a.y1 && y == b.y0) || (y == a.y0 && y == b.y1) {
                    let lo = a.x0.max(b.x0);
                    let hi = a.x1.min(b.x1);
                    if lo < hi {
                        out.push(InterfaceSegment {
                            layers: [i, j],
                            start: [lo, y],
                            end: [hi, y],
                        });
                    }
                }
            }
        }
    }
    out
}

fn side_line(rect: &LayerRect, side: Side) -> (f64, f64, f64) {
    // (fixed coordinate, interval start, interval end)
    match side {
        Side::South => (rect.y0, rect.x0, rect.x1),
        Side::North => (rect.y1, rect.x0, rect.x1),
        Side::West => (rect.x0, rect.y0, rect.y1),
        Side::East => (rect.x1, rect.y0, rect.y1),
    }
}

fn derive_exterior(layers: &[LayerRect], interfaces: &[InterfaceSegment]) -> Vec<ExteriorSegment> {
    let mut out = Vec::new();
    for (index, rect) in layers.iter().enumerate() {
        for side in Side::ALL {
            let (fixed, lo, hi) = side_line(rect, side);
            let mut covered: Vec<(f64, f64)> = interfaces
                .iter()
                .filter(|s| s.layers.contains(&index))
                .filter_map(|s| {
                    let vertical = s.start[0] == s.end[0];
                    if vertical != side.is_vertical() {
                        return None;
                    }
                    if vertical && s.start[0] == fixed {
                        Some((s.start[1], s.end[1]))
                    } else if !vertical && s.start[1] == fixed {
                        Some((s.start[0], s.end[0]))
                    } else {
                        None
                    }
                })
                .collect();
            covered.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cursor = lo;
            let mut pieces = Vec::new();
            for (c0, c1) in covered {
                if c0 > cursor {
                    pieces.push((cursor, c0));
                }
                cursor = cursor.max(c1);
            }
            if cursor < hi {
                pieces.push((cursor, hi));
            }
            for (a, b) in pieces {
                let (start, end) = if side.is_vertical() {
                    ([fixed, a], [fixed, b])
                } else {
                    ([a, fixed], [b, fixed])
                };
                out.push(ExteriorSegment {
                    layer: index,
                    side,
                    start,
                    end,
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Admissibility

/// Admissibility conditions (i)–(viii) for layered domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl Condition {
    pub const ALL: [Condition; 8] = [
        Condition::I,
        Condition::II,
        Condition::III,
        Condition::IV,
        Condition::V,
        Condition::VI,
        Condition::VII,
        Condition::VIII,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "(i)",
            Condition::II => "(ii)",
            Condition::III => "(iii)",
            Condition::IV => "(iv)",
            Condition::V => "(v)",
            Condition::VI => "(vi)",
            Condition::VII => "(vii)",
            Condition::VIII => "(viii)",
        }
    }

    fn description(self) -> &'static str {
        match self {
            Condition::I => "non-overlapping, edge-connected layers",
            Condition::II => "boundary smooth away from finitely many points",
            Condition::III => "exterior corner angles below pi",
            Condition::IV => "interfaces are smooth (straight) segments",
            Condition::V => "no cross points of interfaces",
            Condition::VI => "interface-boundary points are locally angular",
            Condition::VII => "equal layer angles at interface-boundary points",
            Condition::VIII => "total angle at interface-boundary points at most pi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    PassByConstruction,
    Fail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub status: CheckStatus,
    pub detail: String,
    /// Offending coordinates (empty on pass).
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConditionCheck>,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, condition: Condition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("report covers every condition")
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::PassByConstruction => "pass (by construction)",
                CheckStatus::Fail => "FAIL",
            };
            write!(f, "{:<7} {:<22} {}", c.condition.label(), status, c.condition.description())?;
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check(condition: Condition, failures: Vec<([f64; 2], String)>) -> ConditionCheck {
    if failures.is_empty() {
        ConditionCheck {
            condition,
            status: CheckStatus::Pass,
            detail: String::new(),
            points: Vec::new(),
        }
    } else {
        let detail = failures
            .iter()
            .map(|(_, d)| d.as_str())
            .collect::<Vec<_>>()
            .join("; ");
        ConditionCheck {
            condition,
            status: CheckStatus::Fail,
            detail,
            points: failures.into_iter().map(|(p, _)| p).collect(),
        }
    }
}

fn by_construction(condition: Condition) -> ConditionCheck {
    ConditionCheck {
        condition,
        status: CheckStatus::PassByConstruction,
        detail: String::new(),
        points: Vec::new(),
    }
}

/// Evaluates the admissibility conditions. Never fails; failures are in the
/// report.
pub fn admissibility_report(domain: &LayeredDomain) -> AdmissibilityReport {
    let mut checks = Vec::with_capacity(8);

    // (i)
    let mut fails = Vec::new();
    let n = domain.layers.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&domain.layers[i], &domain.layers[j]);
            if a.x0.max(b.x0) < a.x1.min(b.x1) && a.y0.max(b.y0) < a.y1.min(b.y1) {
                fails.push((
                    [a.x0.max(b.x0), a.y0.max(b.y0)],
                    format!("layers {i} and {j} overlap"),
                ));
            }
        }
    }
    let components = domain.component_count();
    if components != 1 {
        fails.push((
            [domain.layers[0].x0, domain.layers[0].y0],
            format!("{components} edge-connected components"),
        ));
    }
    checks.push(check(Condition::I, fails));

    checks.push(by_construction(Condition::II));

    // (iii): corners of the exterior boundary
    let mut corners: Vec<[f64; 2]> = domain.layers.iter().flat_map(|l| l.corners()).collect();
    sort_dedup_points(&mut corners);
    let mut fails = Vec::new();
    for p in corners {
        let q = domain.quarter_turns_at(p);
        if q == 3 {
            fails.push((
                p,
                format!(
                    "exterior corner at ({}, {}) has angle {}pi/2 (needs < pi)",
                    p[0], p[1], q
                ),
            ));
        }
    }
    checks.push(check(Condition::III, fails));

    // (iv)
    let fails = domain
        .interfaces
        .iter()
        .filter(|s| !(s.length() > 0.0) || (s.start[0] != s.end[0] && s.start[1] != s.end[1]))
        .map(|s| (s.start, "interface is not a proper axis-parallel segment".to_string()))
        .collect();
    checks.push(check(Condition::IV, fails));

    // (v)
    let fails = domain
        .cross_points()
        .into_iter()
        .map(|p| (p, format!("cross point at ({}, {})", p[0], p[1])))
        .collect();
    checks.push(check(Condition::V, fails));

    checks.push(by_construction(Condition::VI));

    // (vii), (viii)
    let mut fails_vii = Vec::new();
    let mut fails_viii = Vec::new();
    for corner in domain.boundary_corners() {
        if let CornerKind::Interface { quarter_turns, .. } = corner.kind {
            let p = corner.point;
            if quarter_turns[0] != quarter_turns[1] {
                fails_vii.push((
                    p,
                    format!(
                        "layer angles {}pi/2 and {}pi/2 differ at ({}, {})",
                        quarter_turns[0], quarter_turns[1], p[0], p[1]
                    ),
                ));
            }
            let total = quarter_turns[0] + quarter_turns[1];
            if total > 2 {
                fails_viii.push((
                    p,
                    format!("total angle {}pi/2 exceeds pi at ({}, {})", total, p[0], p[1]),
                ));
            }
        }
    }
    checks.push(check(Condition::VII, fails_vii));
    checks.push(check(Condition::VIII, fails_viii));

    AdmissibilityReport { checks }
}

// ---------------------------------------------------------------------------
// Mesh

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// Counter-clockwise node indices.
    pub nodes: [usize; 3],
    pub layer: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub triangle: usize,
    pub layer: usize,
    /// Index into [`LayeredDomain::exterior`].
    pub segment: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceEdge {
    pub nodes: [usize; 2],
    pub triangles: [usize; 2],
    pub layers: [usize; 2],
    /// Index into [`LayeredDomain::interfaces`].
    pub interface: usize,
}

/// Conforming P1 triangulation of a [`LayeredDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub exterior_edges: Vec<BoundaryEdge>,
    pub interface_edges: Vec<InterfaceEdge>,
    /// Largest cell side length.
    pub h_mesh: f64,
    /// Layer of the first triangle that references each node.
    pub node_layer: Vec<usize>,
    pub layer_count: usize,
    pub interface_count: usize,
    pub segment_count: usize,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let n = self.triangles[t].nodes;
        [self.nodes[n[0]], self.nodes[n[1]], self.nodes[n[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Index of the node closest to `p` (ties broken by lowest index).
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.nodes.iter().enumerate() {
            let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

fn grid_lines(coords: impl Iterator<Item = f64>, h: f64) -> (Vec<f64>, f64) {
    let mut breaks: Vec<f64> = coords.collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut lines = Vec::new();
    let mut h_max: f64 = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        let cells = ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for k in 0..cells {
            lines.push(a + len * (k as f64) / (cells as f64));
        }
        h_max = h_max.max(len / cells as f64);
    }
    lines.push(*breaks.last().expect("at least one layer"));
    (lines, h_max)
}

/// Structured triangulation on globally merged coordinate lines.
///
/// Every cell is split along its lower-left to upper-right diagonal.
pub fn triangulate(domain: &LayeredDomain, h_target: f64) -> Result<Mesh, DomainError> {
    if !(h_target > 0.0 && h_target.is_finite()) {
        return Err(DomainError::InvalidMeshSize(h_target));
    }
    let (xs, hx) = grid_lines(domain.layers.iter().flat_map(|l| [l.x0, l.x1]), h_target);
    let (ys, hy) = grid_lines(domain.layers.iter().flat_map(|l| [l.y0, l.y1]), h_target);
    let (nx, ny) = (xs.len(), ys.len());

    // cell -> layer
    let mut cell_layer = vec![None; (nx - 1) * (ny - 1)];
    let mut used = vec![false; nx * ny];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            if let Some(l) = domain.layers.iter().position(|r| r.contains_strictly(c)) {
                cell_layer[j * (nx - 1) + i] = Some(l);
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    used[(j + dj) * nx + i + di] = true;
                }
            }
        }
    }
    let mut grid_to_node = vec![usize::MAX; nx * ny];
    let mut nodes = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if used[j * nx + i] {
                grid_to_node[j * nx + i] = nodes.len();
                nodes.push([xs[i], ys[j]]);
            }
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if let Some(layer) = cell_layer[j * (nx - 1) + i] {
                let p00 = grid_to_node[j * nx + i];
                let p10 = grid_to_node[j * nx + i + 1];
                let p01 = grid_to_node[(j + 1) * nx + i];
                let p11 = grid_to_node[(j + 1) * nx + i + 1];
                triangles.push(Triangle {
                    nodes: [p00, p10, p11],
                    layer,
                });
                triangles.push(Triangle {
                    nodes: [p00, p11, p01],
                    layer,
                });
            }
        }
    }

    let mut node_layer = vec![usize::MAX; nodes.len()];
    for t in &triangles {
        for &n in &t.nodes {
            if node_layer[n] == usize::MAX {
                node_layer[n] = t.layer;
            }
        }
    }

    // edge -> incident triangles
    let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ti, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t.nodes[k], t.nodes[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(ti);
        }
    }

    let mut exterior_edges = Vec::new();
    let mut interface_edges = Vec::new();
    for (&(a, b), tris) in &edges {
        let pa = nodes[a];
        let pb = nodes[b];
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        match tris.as_slice() {
            [t] => {
                let tri = &triangles[*t];
                let third = tri
                    .nodes
                    .iter()
                    .copied()
                    .find(|&n| n != a && n != b)
                    .expect("triangle has three distinct nodes");
                let pc = nodes[third];
                let side = if pa[0] == pb[0] {
                    if pc[0] < pa[0] {
                        Side::East
                    } else {
                        Side::West
                    }
                } else if pc[1] < pa[1] {
                    Side::North
                } else {
                    Side::South
                };
                let segment = domain
                    .exterior
                    .iter()
                    .position(|s| s.layer == tri.layer && s.side == side && s.contains(mid))
                    .expect("boundary edge lies on an exterior segment");
                exterior_edges.push(BoundaryEdge {
                    nodes: [a, b],
                    triangle: *t,
                    layer: tri.layer,
                    segment,
                });
            }
            [t0, t1] => {
                let (l0, l1) = (triangles[*t0].layer, triangles[*t1].layer);
                if l0 != l1 {
                    let interface = domain
                        .interfaces
                        .iter()
                        .position(|s| {
                            s.contains(mid)
                                && s.layers.contains(&l0)
                                && s.layers.contains(&l1)
                        })
                        .expect("inter-layer edge lies on an interface segment");
                    interface_edges.push(InterfaceEdge {
                        nodes: [a, b],
                        triangles: [*t0, *t1],
                        layers: [l0, l1],
                        interface,
                    });
                }
            }
            _ => unreachable!("structured mesh edges have one or two triangles"),
        }
    }

    Ok(Mesh {
        nodes,
        triangles,
        exterior_edges,
        interface_edges,
        h_mesh: hx.max(hy),
        node_layer,
        layer_count: domain.layers.len(),
        interface_count: domain.interfaces.len(),
        segment_count: domain.exterior.len(),
    })
}
