//! Utterance overlap graphs and exhaustive enumeration of proper colorings.
//!
//! Vertices are utterances, edges connect utterances whose half-open sample
//! intervals intersect. A proper coloring of this graph with `N` colors is a
//! valid assignment of utterances to `N` output channels. Vertex ids and
//! channel indices are 0-based everywhere in this crate; serialized reports
//! shift both to 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `channels^vertices` accepted by [`brute_force_colorings`].
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Temporal extent of one utterance, in samples, with half-open bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceInterval {
    pub id: usize,
    pub speaker: usize,
    /// First sample of activity (inclusive).
    pub start: usize,
    /// One past the last sample of activity (exclusive).
    pub end: usize,
}

impl UtteranceInterval {
    pub fn new(id: usize, speaker: usize, start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidInterval { id, start, end });
        }
        Ok(Self {
            id,
            speaker,
            start,
            end,
        })
    }

    pub fn duration_samples(&self) -> usize {
        self.end - self.start
    }

    /// Strict intersection of half-open intervals; touching endpoints do not
    /// overlap.
    pub fn overlaps(&self, other: &UtteranceInterval) -> bool {
        self.start.max(other.start) < self.end.min(other.end)
    }
}

/// Checks that ids form a permutation of `0..n` and intervals are valid.
pub(crate) fn validate_ids(utterances: &[UtteranceInterval]) -> Result<()> {
    let mut seen = vec![false; utterances.len()];
    for utt in utterances {
        if utt.start >= utt.end {
            return Err(Error::InvalidInterval {
                id: utt.id,
                start: utt.start,
                end: utt.end,
            });
        }
        // Ids beyond the collection length imply a missing smaller id and
        // are reported as a contiguity violation below.
        if let Some(slot) = seen.get_mut(utt.id) {
            if *slot {
                return Err(Error::DuplicateId { id: utt.id });
            }
            *slot = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::NonContiguousIds { missing });
    }
    Ok(())
}

/// Undirected graph over utterance ids with edges between overlapping
/// utterances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapGraph {
    neighbors: Vec<Vec<usize>>,
}

impl OverlapGraph {
    /// Builds a graph from an explicit edge list (mainly for tests).
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); num_vertices];
        for &(u, v) in edges {
            if u == v || u >= num_vertices || v >= num_vertices {
                return Err(Error::InvalidConfig {
                    message: format!("invalid edge ({u}, {v}) for {num_vertices} vertices"),
                });
            }
            if !neighbors[u].contains(&v) {
                neighbors[u].push(v);
                neighbors[v].push(u);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { neighbors })
    }

    pub fn num_vertices(&self) -> usize {
        self.neighbors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, vertex: usize) -> &[usize] {
        &self.neighbors[vertex]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// All edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.num_edges());
        for (u, list) in self.neighbors.iter().enumerate() {
            for &v in list {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges
    }
}

/// Builds the overlap graph: edge `{u, v}` iff
/// `max(start_u, start_v) < min(end_u, end_v)`.
pub fn build_overlap_graph(utterances: &[UtteranceInterval]) -> Result<OverlapGraph> {
    validate_ids(utterances)?;
    let mut neighbors = vec![Vec::new(); utterances.len()];
    for (i, a) in utterances.iter().enumerate() {
        for b in &utterances[i + 1..] {
            if a.overlaps(b) {
                neighbors[a.id].push(b.id);
                neighbors[b.id].push(a.id);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    Ok(OverlapGraph { neighbors })
}

/// Connected components, each sorted ascending, listed by smallest member.
pub fn connected_components(graph: &OverlapGraph) -> Vec<Vec<usize>> {
    let n = graph.num_vertices();
    let mut visited = vec![false; n];
    let mut components = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            component.push(v);
            for &w in graph.neighbors(v) {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// An assignment of utterances to channels, proper with respect to some
/// overlap graph. Channel entries are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coloring {
    pub assignment: Vec<usize>,
}

impl Coloring {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Verifies properness against `graph` with `num_channels` channels.
    pub fn check_proper(&self, graph: &OverlapGraph, num_channels: usize) -> Result<()> {
        if self.assignment.len() != graph.num_vertices() {
            return Err(Error::ColoringLength {
                expected: graph.num_vertices(),
                actual: self.assignment.len(),
            });
        }
        for (u, &channel) in self.assignment.iter().enumerate() {
            if channel >= num_channels {
                return Err(Error::ChannelOutOfRange {
                    channel,
                    channels: num_channels,
                });
            }
            for &v in graph.neighbors(u) {
                if v > u && self.assignment[v] == channel {
                    return Err(Error::ImproperColoring { u, v, channel });
                }
            }
        }
        Ok(())
    }

    /// 1-based copy of the assignment, for reports.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.assignment.iter().map(|&c| c + 1).collect()
    }
}

/// Lazy enumeration of every proper `num_channels`-coloring in lexicographic
/// order of the assignment vector.
///
/// Backtracking over vertices in id order; a color is admissible at a vertex
/// when no already-colored neighbor carries it. The sequence is empty iff the
/// chromatic number exceeds `num_channels`. Colorings related by channel
/// permutation are all emitted.
pub fn enumerate_colorings(graph: &OverlapGraph, num_channels: usize) -> ColoringIter<'_> {
    ColoringIter {
        graph,
        num_channels,
        assignment: vec![0; graph.num_vertices()],
        next_color: vec![0; graph.num_vertices() + 1],
        depth: 0,
        exhausted: false,
    }
}

pub struct ColoringIter<'a> {
    graph: &'a OverlapGraph,
    num_channels: usize,
    assignment: Vec<usize>,
    /// Next candidate color to try at each depth.
    next_color: Vec<usize>,
    depth: usize,
    exhausted: bool,
}

impl ColoringIter<'_> {
    fn admissible(&self, vertex: usize, color: usize) -> bool {
        self.graph
            .neighbors(vertex)
            .iter()
            .all(|&w| w >= vertex || self.assignment[w] != color)
    }
}

impl Iterator for ColoringIter<'_> {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        if self.exhausted {
            return None;
        }
        let n = self.graph.num_vertices();
        loop {
            if self.depth == n {
                let item = Coloring::new(self.assignment.clone());
                if n == 0 {
                    self.exhausted = true;
                } else {
                    self.depth -= 1;
                }
                return Some(item);
            }
            let mut advanced = false;
            for color in self.next_color[self.depth]..self.num_channels {
                if self.admissible(self.depth, color) {
                    self.assignment[self.depth] = color;
                    self.next_color[self.depth] = color + 1;
                    self.depth += 1;
                    self.next_color[self.depth] = 0;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                self.next_color[self.depth] = 0;
                if self.depth == 0 {
                    self.exhausted = true;
                    return None;
                }
                self.depth -= 1;
            }
        }
    }
}

/// Filters all `num_channels^U` assignment vectors by the properness
/// predicate; test oracle for [`enumerate_colorings`] with the same
/// lexicographic order.
pub fn brute_force_colorings(graph: &OverlapGraph, num_channels: usize) -> Result<Vec<Coloring>> {
    let n = graph.num_vertices();
    let total = (num_channels as u64).checked_pow(n as u32);
    match total {
        Some(t) if t <= BRUTE_FORCE_LIMIT => {}
        _ => {
            return Err(Error::BruteForceGuard {
                channels: num_channels,
                vertices: n,
                limit: BRUTE_FORCE_LIMIT,
            })
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Coloring::new(Vec::new()));
        return Ok(out);
    }
    if num_channels == 0 {
        return Ok(out);
    }
    let edges = graph.edges();
    let mut assignment = vec![0usize; n];
    'outer: loop {
        if edges.iter().all(|&(u, v)| assignment[u] != assignment[v]) {
            out.push(Coloring::new(assignment.clone()));
        }
        // Odometer increment on the last position, carrying leftward, walks
        // the assignment vectors in lexicographic order.
        for i in (0..n).rev() {
            assignment[i] += 1;
            if assignment[i] < num_channels {
                continue 'outer;
            }
            assignment[i] = 0;
        }
        break;
    }
    Ok(out)
}

/// Maximum number of simultaneously active utterances, by sweeping sorted
/// boundary events. Ends sort before starts at equal positions, matching the
/// half-open interval convention.
pub fn max_concurrency(utterances: &[UtteranceInterval]) -> usize {
    let mut events: Vec<(usize, i32)> = Vec::with_capacity(utterances.len() * 2);
    for utt in utterances {
        events.push((utt.start, 1));
        events.push((utt.end, -1));
    }
    events.sort_unstable_by_key(|&(pos, delta)| (pos, delta));
    let mut active = 0i64;
    let mut max = 0i64;
    for (_, delta) in events {
        active += delta as i64;
        max = max.max(active);
    }
    max as usize
}
