//! Mesh data model, manifold validation, net parameters and file I/O.
//!
//! Text format: a header line `d N M`, then N lines of d coordinates, then
//! M lines of d+1 zero-based vertex indices. JSON format: an object with
//! `dim`, `points` and `cells`. Canonical output writes every coordinate with
//! 17 significant digits and LF line endings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Simplex};

/// Points closer than this are rejected as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-12;

/// Ordered point coordinates in R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_rows<P: AsRef<[f64]>>(dim: usize, rows: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        PointSet::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// First pair of points closer than [`DUPLICATE_DISTANCE`], if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if self.point(j)[0] - self.point(i)[0] >= DUPLICATE_DISTANCE {
                    break;
                }
                if geom::dist(self.point(i), self.point(j)) < DUPLICATE_DISTANCE {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
        None
    }

    /// Minimum pairwise distance.
    pub fn separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.min(geom::dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|x| x * factor).collect(),
        }
    }
}

/// Sorted d-tuple of vertex indices identifying a facet.
pub type FacetKey = Vec<usize>;

/// Simplicial mesh: points, (d+1)-tuples of vertex indices and the
/// facet-to-cell adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    points: PointSet,
    cells: Vec<Vec<usize>>,
    facet_adjacency: BTreeMap<FacetKey, Vec<usize>>,
}

impl SimplicialMesh {
    /// Builds a mesh after checking arity and index ranges.
    pub fn new(points: PointSet, cells: Vec<Vec<usize>>) -> Result<Self> {
        let d = points.dim();
        let n = points.len();
        for c in &cells {
            if c.len() != d + 1 {
                return Err(Error::WrongArity {
                    expected: d + 1,
                    found: c.len(),
                });
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    count: n,
                });
            }
        }
        let facet_adjacency = build_adjacency(&cells);
        Ok(SimplicialMesh {
            points,
            cells,
            facet_adjacency,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn facet_adjacency(&self) -> &BTreeMap<FacetKey, Vec<usize>> {
        &self.facet_adjacency
    }

    pub fn simplex(&self, cell: usize) -> Simplex {
        let d = self.dim();
        let mut coords = Vec::with_capacity(d * (d + 1));
        for &v in &self.cells[cell] {
            coords.extend_from_slice(self.points.point(v));
        }
        Simplex::from_flat(d, coords).expect("mesh coordinates are finite")
    }

    pub fn simplices(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.cells.len()).map(|c| self.simplex(c))
    }

    /// Facets with exactly one incident cell.
    pub fn boundary_facets(&self) -> Vec<&FacetKey> {
        self.facet_adjacency
            .iter()
            .filter(|(_, cs)| cs.len() == 1)
            .map(|(f, _)| f)
            .collect()
    }

    /// Vertices lying on a boundary facet, as a membership mask.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut mask = vec![false; self.points.len()];
        for f in self.boundary_facets() {
            for &v in f {
                mask[v] = true;
            }
        }
        mask
    }

    /// Adjacency rebuilt from the cell list alone.
    pub fn rebuild_adjacency(&self) -> BTreeMap<FacetKey, Vec<usize>> {
        build_adjacency(&self.cells)
    }

    pub fn total_volume(&self) -> f64 {
        self.simplices().map(|s| s.volume()).sum()
    }

    pub fn scaled(&self, factor: f64) -> SimplicialMesh {
        SimplicialMesh {
            points: self.points.scaled(factor),
            cells: self.cells.clone(),
            facet_adjacency: self.facet_adjacency.clone(),
        }
    }

    /// Mesh restricted to the given cells, keeping every point.
    pub fn with_cells(&self, cells: Vec<Vec<usize>>) -> Result<SimplicialMesh> {
        SimplicialMesh::new(self.points.clone(), cells)
    }
}

fn build_adjacency(cells: &[Vec<usize>]) -> BTreeMap<FacetKey, Vec<usize>> {
    let mut adj: BTreeMap<FacetKey, Vec<usize>> = BTreeMap::new();
    for (ci, c) in cells.iter().enumerate() {
        for skip in 0..c.len() {
            let mut f: Vec<usize> = c
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &v)| v)
                .collect();
            f.sort_unstable();
            adj.entry(f).or_default().push(ci);
        }
    }
    adj
}

/// Findings of a manifold check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Facets with a number of incident cells other than one or two.
    pub bad_facets: Vec<(FacetKey, usize)>,
    /// Pairs of cells with identical vertex sets.
    pub duplicate_cells: Vec<(usize, usize)>,
    pub degenerate_cells: Vec<usize>,
    /// Connected components of the cell graph (cells sharing a facet).
    pub components: usize,
    pub connected: bool,
    pub pass: bool,
}

pub fn validate_manifold(m: &SimplicialMesh) -> ValidationReport {
    let bad_facets: Vec<(FacetKey, usize)> = m
        .facet_adjacency
        .iter()
        .filter(|(_, cs)| cs.is_empty() || cs.len() > 2)
        .map(|(f, cs)| (f.clone(), cs.len()))
        .collect();

    let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut duplicate_cells = Vec::new();
    for (ci, c) in m.cells.iter().enumerate() {
        let mut key = c.clone();
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            duplicate_cells.push((first, ci));
        } else {
            seen.insert(key, ci);
        }
    }

    let degenerate_cells: Vec<usize> = (0..m.num_cells())
        .filter(|&c| m.simplex(c).is_degenerate())
        .collect();

    let components = count_components(m);
    let connected = components <= 1;
    let pass = bad_facets.is_empty()
        && duplicate_cells.is_empty()
        && degenerate_cells.is_empty()
        && connected
        && m.num_cells() > 0;
    ValidationReport {
        bad_facets,
        duplicate_cells,
        degenerate_cells,
        components,
        connected,
        pass,
    }
}

fn count_components(m: &SimplicialMesh) -> usize {
    let n = m.num_cells();
    let mut neighbours = vec![Vec::new(); n];
    for cs in m.facet_adjacency.values() {
        for &a in cs {
            for &b in cs {
                if a != b {
                    neighbours[a].push(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for &nb in &neighbours[c] {
                if label[nb] == usize::MAX {
                    label[nb] = count;
                    queue.push_back(nb);
                }
            }
        }
        count += 1;
    }
    count
}

/// Covering radius, separation and their ratio for a point sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetParameters {
    pub epsilon: f64,
    pub eta: f64,
    pub eta_bar: f64,
}

/// Net parameters of `ps` over the region covered by `hull_mesh`.
///
/// The covering radius is the largest nearest-sample distance found among
/// the circumcenters of cells that lie inside the region and the relative
/// circumcenters of every face of every boundary facet that lie inside that
/// face. For a Delaunay triangulation of a convex hull these are the
/// candidate maximizers of the nearest-sample distance.
pub fn net_parameters(ps: &PointSet, hull_mesh: &SimplicialMesh) -> Result<NetParameters> {
    if ps.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: ps.len(),
        });
    }
    if hull_mesh.num_cells() == 0 {
        return Err(Error::EmptyMesh);
    }
    let eta = ps.separation();
    let nearest = |x: &[f64]| -> f64 {
        ps.iter()
            .map(|p| geom::dist_sq(p, x))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };
    let mut epsilon: f64 = 0.0;
    for c in 0..hull_mesh.num_cells() {
        let s = hull_mesh.simplex(c);
        if let Ok(ball) = s.circumsphere() {
            if locate(hull_mesh, &ball.center).is_some() {
                epsilon = epsilon.max(nearest(&ball.center));
            }
        }
    }
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for f in hull_mesh.boundary_facets() {
        collect_faces(f, &mut faces);
    }
    for face in &faces {
        let pts: Vec<&[f64]> = face.iter().map(|&v| hull_mesh.points().point(v)).collect();
        if let Some(c) = relative_circumcenter_inside(&pts) {
            epsilon = epsilon.max(nearest(&c));
        }
    }
    Ok(NetParameters {
        epsilon,
        eta,
        eta_bar: eta / epsilon,
    })
}

/// Monte-Carlo estimate of the covering radius from `samples` seeded
/// uniform points in the cells (volume-weighted).
pub fn covering_radius_sampled(ps: &PointSet, mesh: &SimplicialMesh, samples: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vols: Vec<f64> = mesh.simplices().map(|s| s.volume()).collect();
    let total: f64 = vols.iter().sum();
    let d = mesh.dim();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let mut t = rng.gen::<f64>() * total;
        let mut cell = 0;
        while cell + 1 < vols.len() && t > vols[cell] {
            t -= vols[cell];
            cell += 1;
        }
        // uniform barycentric weights from sorted uniforms
        let mut cuts: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        let mut bary = Vec::with_capacity(d + 1);
        let mut prev = 0.0;
        for c in &cuts {
            bary.push(c - prev);
            prev = *c;
        }
        bary.push(1.0 - prev);
        let s = mesh.simplex(cell);
        let x: Vec<f64> = (0..d)
            .map(|m| s.vertices().zip(&bary).map(|(v, w)| v[m] * w).sum())
            .collect();
        let near = ps
            .iter()
            .map(|p| geom::dist_sq(p, &x))
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        best = best.max(near);
    }
    best
}

fn collect_faces(face: &[usize], out: &mut BTreeSet<Vec<usize>>) {
    if face.len() < 2 || out.contains(face) {
        return;
    }
    out.insert(face.to_vec());
    for skip in 0..face.len() {
        let sub: Vec<usize> = face
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &v)| v)
            .collect();
        collect_faces(&sub, out);
    }
}

/// Circumcenter of a face within its own affine hull, if it lies in the
/// closed face.
fn relative_circumcenter_inside(pts: &[&[f64]]) -> Option<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let p0 = pts[0];
    let dim = p0.len();
    let k = pts.len() - 1;
    let e = DMatrix::from_fn(dim, k, |r, c| pts[c + 1][r] - p0[r]);
    let gram = e.transpose() * &e;
    let rhs = DVector::from_fn(k, |r, _| 0.5 * geom::dist_sq(pts[r + 1], p0));
    let lambda = gram.cholesky()?.solve(&rhs);
    let l0 = 1.0 - lambda.sum();
    let tol = -1e-12;
    if l0 < tol || lambda.iter().any(|&l| l < tol) {
        return None;
    }
    let off = e * lambda;
    Some((0..dim).map(|m| p0[m] + off[m]).collect())
}

/// Index of a cell containing `x` (closed, with a small barycentric
/// tolerance), by linear search.
pub fn locate(mesh: &SimplicialMesh, x: &[f64]) -> Option<usize> {
    (0..mesh.num_cells()).find(|&c| {
        barycentric(&mesh.simplex(c), x)
            .map(|b| b.iter().all(|&l| l >= -1e-12))
            .unwrap_or(false)
    })
}

/// Barycentric coordinates of `x` with respect to `s`.
pub fn barycentric(s: &Simplex, x: &[f64]) -> Option<Vec<f64>> {
    let e = s.edge_matrix();
    let v0 = s.vertex(0);
    let rhs = nalgebra::DVector::from_fn(s.dim(), |r, _| x[r] - v0[r]);
    let l = e.lu().solve(&rhs)?;
    let mut out = Vec::with_capacity(s.dim() + 1);
    out.push(1.0 - l.sum());
    out.extend(l.iter());
    Some(out)
}

/// Kuhn (Freudenthal) subdivision of the unit cube `[0,1]^d` with `n`
/// intervals per axis: `n^d * d!` congruent cells.
pub fn structured_grid(dim: usize, n: usize) -> Result<SimplicialMesh> {
    if dim == 0 || n == 0 {
        return Err(Error::InvalidArgument("grid needs dim >= 1 and n >= 1".into()));
    }
    let side = n + 1;
    let total = side.pow(dim as u32);
    let index_of = |z: &[usize]| z.iter().rev().fold(0, |acc, &zi| acc * side + zi);
    let mut coords = Vec::with_capacity(total * dim);
    for lin in 0..total {
        let mut rest = lin;
        for _ in 0..dim {
            coords.push((rest % side) as f64 / n as f64);
            rest /= side;
        }
    }
    let perms = permutations(dim);
    let mut cells = Vec::with_capacity(n.pow(dim as u32) * perms.len());
    for lin in 0..n.pow(dim as u32) {
        let mut base = Vec::with_capacity(dim);
        let mut rest = lin;
        for _ in 0..dim {
            base.push(rest % n);
            rest /= n;
        }
        for p in &perms {
            let mut z = base.clone();
            let mut cell = vec![index_of(&z)];
            for &axis in p {
                z[axis] += 1;
                cell.push(index_of(&z));
            }
            cells.push(cell);
        }
    }
    SimplicialMesh::new(PointSet::new(dim, coords)?, cells)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Serialization format for meshes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

impl Format {
    /// Guesses the format from a path extension (`.json` or anything else).
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Text,
        }
    }
}

/// 17-significant-digit scientific representation used in every file.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x)
}

struct Tokens<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    current: Vec<&'a str>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens {
            lines: text.lines().enumerate().peekable(),
            current: Vec::new(),
            line: 0,
        }
    }

    /// Next non-empty line split into whitespace tokens.
    fn next_line(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.lines.by_ref() {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                self.line = i + 1;
                self.current = toks.clone();
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let last = self.line;
        self.next_line().ok_or_else(|| Error::Parse {
            line: last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number '{tok}'"),
    })
}

fn parse_point_lines(tokens: &mut Tokens, d: usize, n: usize) -> Result<Vec<f64>> {
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let (line, toks) = tokens.expect_line("point coordinates")?;
        if toks.len() != d {
            return Err(Error::Parse {
                line,
                message: format!("expected {d} coordinates, found {}", toks.len()),
            });
        }
        for t in toks {
            let x: f64 = parse_num(t, line)?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: "non-finite coordinate".into(),
                });
            }
            coords.push(x);
        }
    }
    Ok(coords)
}

/// Parses a points file: a `d N` header followed by N lines of d reals.
pub fn load_points(text: &str) -> Result<PointSet> {
    let mut tokens = Tokens::new(text);
    let (line, header) = tokens.expect_line("header 'd N'")?;
    if header.len() != 2 {
        return Err(Error::Parse {
            line,
            message: "header must be 'd N'".into(),
        });
    }
    let d: usize = parse_num(header[0], line)?;
    let n: usize = parse_num(header[1], line)?;
    if d == 0 {
        return Err(Error::Parse {
            line,
            message: "dimension must be >= 1".into(),
        });
    }
    let coords = parse_point_lines(&mut tokens, d, n)?;
    if let Some((l, _)) = tokens.next_line() {
        return Err(Error::Parse {
            line: l,
            message: "trailing content".into(),
        });
    }
    let ps = PointSet::new(d, coords)?;
    if let Some((a, b)) = ps.find_duplicate() {
        return Err(Error::DuplicatePoints(a, b));
    }
    Ok(ps)
}

pub fn save_points(ps: &PointSet) -> String {
    let mut out = format!("{} {}\n", ps.dim(), ps.len());
    for p in ps.iter() {
        let row: Vec<String> = p.iter().map(|&x| fmt_real(x)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
struct JsonMesh {
    dim: usize,
    points: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
}

/// Loads a mesh in either format. Duplicate points are rejected.
pub fn load_mesh(source: &[u8], format: Format) -> Result<SimplicialMesh> {
    let text = std::str::from_utf8(source).map_err(|e| Error::Parse {
        line: 0,
        message: format!("invalid utf-8: {e}"),
    })?;
    let mesh = match format {
        Format::Text => parse_text_mesh(text)?,
        Format::Json => {
            let raw: JsonMesh = serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            let ps = PointSet::from_rows(raw.dim, &raw.points)?;
            SimplicialMesh::new(ps, raw.cells)?
        }
    };
    if let Some((a, b)) = mesh.points.find_duplicate() {
        return Err(Error::DuplicatePoints(a, b));
    }
    Ok(mesh)
}

fn parse_text_mesh(text: &str) -> Result<SimplicialMesh> {
    let mut tokens = Tokens::new(text);
    let (line, header) = tokens.expect_line("header 'd N M'")?;
    if header.len() != 3 {
        return Err(Error::Parse {
            line,
            message: "header must be 'd N M'".into(),
        });
    }
    let d: usize = parse_num(header[0], line)?;
    let n: usize = parse_num(header[1], line)?;
    let m: usize = parse_num(header[2], line)?;
    if d == 0 {
        return Err(Error::Parse {
            line,
            message: "dimension must be >= 1".into(),
        });
    }
    let coords = parse_point_lines(&mut tokens, d, n)?;
    let mut cells = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, toks) = tokens.expect_line("cell indices")?;
        if toks.len() != d + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} indices, found {}", d + 1, toks.len()),
            });
        }
        let cell: Vec<usize> = toks
            .iter()
            .map(|t| parse_num(t, line))
            .collect::<Result<_>>()?;
        if let Some(&bad) = cell.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                count: n,
            });
        }
        cells.push(cell);
    }
    if let Some((l, _)) = tokens.next_line() {
        return Err(Error::Parse {
            line: l,
            message: "trailing content".into(),
        });
    }
    SimplicialMesh::new(PointSet::new(d, coords)?, cells)
}

/// Canonical serialization.
pub fn save_mesh(m: &SimplicialMesh, format: Format) -> String {
    let d = m.dim();
    match format {
        Format::Text => {
            let mut out = format!("{} {} {}\n", d, m.points.len(), m.cells.len());
            for p in m.points.iter() {
                let row: Vec<String> = p.iter().map(|&x| fmt_real(x)).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
            for c in &m.cells {
                let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut out = String::new();
            let _ = write!(out, "{{\"dim\":{d},\"points\":[");
            for (i, p) in m.points.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let row: Vec<String> = p.iter().map(|&x| fmt_real(x)).collect();
                let _ = write!(out, "[{}]", row.join(","));
            }
            out.push_str("],\"cells\":[");
            for (i, c) in m.cells.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                let _ = write!(out, "[{}]", row.join(","));
            }
            out.push_str("]}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> SimplicialMesh {
        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        SimplicialMesh::new(ps, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap()
    }

    #[test]
    fn minimal_text_mesh() {
        let m = load_mesh(b"2 3 1\n0 0\n1 0\n0 1\n0 1 2\n", Format::Text).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.points().len(), 3);
        assert_eq!(m.facet_adjacency().len(), 3);
    }

    #[test]
    fn out_of_range_index() {
        let err = load_mesh(b"2 3 1\n0 0\n1 0\n0 1\n0 1 99\n", Format::Text).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 99, count: 3 });
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = load_mesh(b"2 3 1\n0 0\n1 x\n0 1\n0 1 2\n", Format::Text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = load_mesh(b"2 3 1\n0 0\n1 0\n0 1\n0 1\n", Format::Text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
        let err = load_mesh(b"{\"dim\":2,\"points\":[[0,0],[1,0],[0,1]],\"cells\":[[0,1]]}", Format::Json)
            .unwrap_err();
        assert!(matches!(err, Error::WrongArity { .. }));
    }

    #[test]
    fn duplicate_points_rejected() {
        let err = load_mesh(b"2 3 0\n0 0\n1 0\n0 0\n", Format::Text).unwrap_err();
        assert_eq!(err, Error::DuplicatePoints(0, 2));
    }

    #[test]
    fn json_round_trip_bytes() {
        let m = unit_square();
        let json = save_mesh(&m, Format::Json);
        let back = load_mesh(json.as_bytes(), Format::Json).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_mesh(&back, Format::Json), json);
    }

    #[test]
    fn empty_cell_list() {
        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let m = SimplicialMesh::new(ps, vec![]).unwrap();
        let text = save_mesh(&m, Format::Text);
        assert!(text.starts_with("2 2 0\n"));
        assert_eq!(load_mesh(text.as_bytes(), Format::Text).unwrap(), m);
    }

    #[test]
    fn four_dimensional_round_trip() {
        let m = structured_grid(4, 1).unwrap();
        for f in [Format::Text, Format::Json] {
            let s = save_mesh(&m, f);
            assert_eq!(load_mesh(s.as_bytes(), f).unwrap(), m);
        }
    }

    #[test]
    fn manifold_checks() {
        assert!(validate_manifold(&unit_square()).pass);

        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]])
            .unwrap();
        let fan = SimplicialMesh::new(ps, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]).unwrap();
        let r = validate_manifold(&fan);
        assert!(!r.pass);
        assert_eq!(r.bad_facets, vec![(vec![0, 1], 3)]);

        let ps = PointSet::from_rows(
            2,
            &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0], [6.0, 5.0], [5.0, 6.0]],
        )
        .unwrap();
        let apart = SimplicialMesh::new(ps, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let r = validate_manifold(&apart);
        assert!(!r.pass && !r.connected);
        assert_eq!(r.components, 2);
    }

    #[test]
    fn net_parameters_examples() {
        let m = unit_square();
        let np = net_parameters(m.points(), &m).unwrap();
        assert!((np.eta - 1.0).abs() < 1e-15);
        assert!((np.epsilon - 0.5f64.sqrt()).abs() < 1e-15);

        let ps = PointSet::from_rows(1, &[[0.0], [1.0]]).unwrap();
        let seg = SimplicialMesh::new(ps.clone(), vec![vec![0, 1]]).unwrap();
        let np = net_parameters(&ps, &seg).unwrap();
        assert_eq!((np.eta, np.epsilon), (1.0, 0.5));

        let g = structured_grid(2, 4).unwrap();
        let np = net_parameters(g.points(), &g).unwrap();
        assert!((np.eta - 0.25).abs() < 1e-15);

        let one = PointSet::from_rows(2, &[[0.0, 0.0]]).unwrap();
        assert!(matches!(net_parameters(&one, &m), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn grid_is_valid() {
        for d in 1..=4 {
            let g = structured_grid(d, 2).unwrap();
            assert!(validate_manifold(&g).pass, "d={d}");
            assert!((g.total_volume() - 1.0).abs() < 1e-12);
            assert_eq!(g.rebuild_adjacency(), *g.facet_adjacency());
        }
    }
}
