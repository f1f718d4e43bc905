//! A deliberately slow twin of [`Graph`](crate::graph::Graph): same levels,
//! same service discipline, no incremental state. Weights and candidate
//! levels are recomputed from the plain edge list on every use, so any
//! disagreement in a lockstep replay points at the incremental bookkeeping.
//!
//! The only intentional degree of freedom is the order in which flagged
//! nodes are served. [`SchedulerOrder::Lifo`] matches the maintained
//! structure exactly; [`SchedulerOrder::Fifo`] is a correct but different
//! schedule, useful for demonstrating that replay equality is a property of
//! the discipline, not an accident.

use std::collections::VecDeque;

use num_bigint::BigUint;

use crate::config::{Config, ConfigError};
use crate::graph::{EdgeId, GraphError, NodeId, Update};
use crate::weight::{FixedWeight, Threshold, WeightCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerOrder {
    /// Most recently flagged first; the discipline of the real structure.
    Lifo,
    /// Oldest flag first.
    Fifo,
}

pub struct NaiveGraph {
    cfg: Config,
    wctx: WeightCtx,
    order: SchedulerOrder,
    levels: Vec<u32>,
    dirty_up: Vec<bool>,
    dirty_down: Vec<bool>,
    /// Sorted endpoints and current level, tombstoned on delete.
    edges: Vec<Option<(Box<[NodeId]>, u32)>>,
    up_queue: VecDeque<NodeId>,
    down_queue: VecDeque<NodeId>,
    live_edges: u64,
}

impl NaiveGraph {
    pub fn new(n: u32, f: u32, order: SchedulerOrder) -> Result<Self, ConfigError> {
        Ok(Self::from_config(Config::new(n, f)?, order))
    }

    pub fn from_config(cfg: Config, order: SchedulerOrder) -> Self {
        let n = cfg.n() as usize;
        let wctx = WeightCtx::new(&cfg);
        NaiveGraph {
            cfg,
            wctx,
            order,
            levels: vec![0; n],
            dirty_up: vec![false; n],
            dirty_down: vec![false; n],
            edges: Vec::new(),
            up_queue: VecDeque::new(),
            down_queue: VecDeque::new(),
            live_edges: 0,
        }
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn weight_ctx(&self) -> &WeightCtx {
        &self.wctx
    }

    pub fn level(&self, v: NodeId) -> u32 {
        self.levels[v as usize]
    }

    pub fn live_edge_count(&self) -> u64 {
        self.live_edges
    }

    pub fn edge_level(&self, e: EdgeId) -> Option<u32> {
        if e == 0 || e > self.edges.len() as u64 {
            return None;
        }
        self.edges[e as usize - 1].as_ref().map(|&(_, lvl)| lvl)
    }

    pub fn is_quiescent(&self) -> bool {
        !self
            .dirty_up
            .iter()
            .chain(self.dirty_down.iter())
            .any(|&d| d)
    }

    pub fn vertex_cover(&self) -> Vec<NodeId> {
        (0..self.cfg.n())
            .filter(|&v| self.levels[v as usize] > 0)
            .collect()
    }

    /// Incident weight of `v`, summed from the edge list.
    pub fn node_weight(&self, v: NodeId) -> FixedWeight {
        let mut num = BigUint::from(0u32);
        for (ends, lvl) in self.edges.iter().flatten() {
            if ends.contains(&v) {
                num += self.wctx.pow(*lvl).to_biguint();
            }
        }
        self.wctx.from_biguint(num)
    }

    pub fn matching_value(&self) -> FixedWeight {
        let mut num = BigUint::from(0u32);
        for (_, lvl) in self.edges.iter().flatten() {
            num += self.wctx.pow(*lvl).to_biguint();
        }
        self.wctx.from_biguint(num)
    }

    /// Weight of `v` as if it sat at `target`, from first principles.
    fn weight_at_level(&self, v: NodeId, target: u32) -> FixedWeight {
        let mut num = BigUint::from(0u32);
        for (ends, _) in self.edges.iter().flatten() {
            if !ends.contains(&v) {
                continue;
            }
            let other = ends
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| self.levels[u as usize])
                .max()
                .unwrap();
            num += self.wctx.pow(other.max(target)).to_biguint();
        }
        self.wctx.from_biguint(num)
    }

    pub fn apply(&mut self, update: &Update) -> Result<Option<EdgeId>, GraphError> {
        match update {
            Update::Insert(vs) => self.insert_edge(vs).map(Some),
            Update::Delete(id) => self.delete_edge(*id).map(|_| None),
        }
    }

    pub fn insert_edge(&mut self, vertices: &[NodeId]) -> Result<EdgeId, GraphError> {
        if vertices.len() < 2 {
            return Err(GraphError::EdgeTooSmall(vertices.len()));
        }
        if vertices.len() > self.cfg.f() as usize {
            return Err(GraphError::EdgeTooLarge {
                got: vertices.len(),
                max: self.cfg.f(),
            });
        }
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::RepeatedVertex(pair[0]));
            }
        }
        if let Some(&v) = sorted.last() {
            if v >= self.cfg.n() {
                return Err(GraphError::VertexOutOfRange {
                    vertex: v,
                    n: self.cfg.n(),
                });
            }
        }
        if self
            .edges
            .iter()
            .flatten()
            .any(|(ends, _)| ends.as_ref() == sorted.as_slice())
        {
            return Err(GraphError::DuplicateEdge);
        }
        let level = sorted
            .iter()
            .map(|&u| self.levels[u as usize])
            .max()
            .unwrap();
        self.edges
            .push(Some((sorted.clone().into_boxed_slice(), level)));
        self.live_edges += 1;
        for &u in &sorted {
            self.refresh(u);
        }
        self.settle();
        Ok(self.edges.len() as EdgeId)
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<(), GraphError> {
        if id == 0 || id > self.edges.len() as u64 {
            return Err(GraphError::UnknownEdge(id));
        }
        let (ends, _) = match self.edges[id as usize - 1].take() {
            Some(e) => e,
            None => return Err(GraphError::UnknownEdge(id)),
        };
        self.live_edges -= 1;
        for &u in ends.iter() {
            self.refresh(u);
        }
        self.settle();
        Ok(())
    }

    fn eval_dirty(&self, v: NodeId) -> (bool, bool) {
        let w = self.node_weight(v);
        let lvl = self.levels[v as usize];
        let up = if lvl == 0 {
            self.wctx.cmp_threshold(&w, Threshold::InvBetaSq) == std::cmp::Ordering::Greater
        } else {
            self.wctx.cmp_threshold(&w, Threshold::One) != std::cmp::Ordering::Less
        };
        let down = lvl > 0
            && self.wctx.cmp_threshold(&w, Threshold::InvAlphaBetaSq)
                != std::cmp::Ordering::Greater;
        (up, down)
    }

    fn refresh(&mut self, v: NodeId) {
        let (up, down) = self.eval_dirty(v);
        let vi = v as usize;
        if up && !self.dirty_up[vi] {
            self.up_queue.push_back(v);
        }
        self.dirty_up[vi] = up;
        if down && !self.dirty_down[vi] {
            self.down_queue.push_back(v);
        }
        self.dirty_down[vi] = down;
    }

    fn pop(&mut self, which_up: bool) -> Option<NodeId> {
        loop {
            let queue = if which_up {
                &mut self.up_queue
            } else {
                &mut self.down_queue
            };
            let v = match self.order {
                SchedulerOrder::Lifo => queue.pop_back(),
                SchedulerOrder::Fifo => queue.pop_front(),
            }?;
            let live = if which_up {
                self.dirty_up[v as usize]
            } else {
                self.dirty_down[v as usize]
            };
            if live {
                return Some(v);
            }
        }
    }

    fn settle(&mut self) {
        loop {
            if let Some(v) = self.pop(true) {
                self.fix_up(v);
            } else if let Some(v) = self.pop(false) {
                self.fix_down(v);
            } else {
                break;
            }
        }
    }

    fn fix_up(&mut self, v: NodeId) {
        for j in self.levels[v as usize] + 1..=self.cfg.level_cap() {
            let w = self.weight_at_level(v, j);
            if self.wctx.cmp_threshold(&w, Threshold::InvBeta) != std::cmp::Ordering::Greater {
                self.move_node(v, j);
                return;
            }
        }
        panic!("no feasible level for node {v}");
    }

    fn fix_down(&mut self, v: NodeId) {
        for j in (1..self.levels[v as usize]).rev() {
            let w = self.weight_at_level(v, j);
            if self.wctx.cmp_threshold(&w, Threshold::InvBetaSq) == std::cmp::Ordering::Greater {
                self.move_node(v, j);
                return;
            }
        }
        self.move_node(v, 0);
    }

    /// Re-levels `v`, recomputes every incident edge level from scratch, and
    /// re-flags `v` plus the endpoints of the edges that actually moved, in
    /// ascending id order, mirroring the incremental structure's refresh.
    fn move_node(&mut self, v: NodeId, new: u32) {
        self.levels[v as usize] = new;
        let mut touched = vec![v];
        let levels = &self.levels;
        for entry in self.edges.iter_mut().flatten() {
            let (ends, lvl) = entry;
            if !ends.contains(&v) {
                continue;
            }
            let fresh = ends.iter().map(|&u| levels[u as usize]).max().unwrap();
            if fresh != *lvl {
                *lvl = fresh;
                touched.extend_from_slice(ends);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for u in touched {
            self.refresh(u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_matches_the_worked_numbers() {
        let mut g = NaiveGraph::new(4, 2, SchedulerOrder::Lifo).unwrap();
        g.insert_edge(&[0, 1]).unwrap();
        assert_eq!(g.level(0), 1);
        assert_eq!(g.level(1), 1);
        assert_eq!(g.edge_level(1), Some(1));
        assert_eq!(g.wctx.render(&g.node_weight(0)), "17/289");
        assert!(g.is_quiescent());
        g.delete_edge(1).unwrap();
        assert_eq!(g.level(0), 0);
        assert!(g.node_weight(0).is_zero());
    }

    #[test]
    fn rejects_what_the_real_structure_rejects() {
        let mut g = NaiveGraph::new(5, 2, SchedulerOrder::Lifo).unwrap();
        assert!(matches!(
            g.insert_edge(&[3]),
            Err(GraphError::EdgeTooSmall(1))
        ));
        assert!(matches!(
            g.insert_edge(&[0, 9]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        g.insert_edge(&[4, 2]).unwrap();
        assert!(matches!(
            g.insert_edge(&[2, 4]),
            Err(GraphError::DuplicateEdge)
        ));
        assert!(matches!(g.delete_edge(7), Err(GraphError::UnknownEdge(7))));
    }
}
