use crate::pddl::{GroundedTask, State};

const INF: u32 = u32::MAX;

/// Additive delete-relaxation heuristic. Negative literals are treated as
/// free, so a clause with a negative literal costs nothing.
pub struct HAdd<'a> {
    task: &'a GroundedTask,
    cost: Vec<u32>,
}

impl<'a> HAdd<'a> {
    pub fn new(task: &'a GroundedTask) -> HAdd<'a> {
        HAdd {
            task,
            cost: vec![INF; task.num_facts()],
        }
    }

    fn sum(&self, pos: &[usize], clauses: &[Vec<crate::pddl::Lit>]) -> u32 {
        let mut total: u64 = 0;
        for &f in pos {
            let c = self.cost[f];
            if c == INF {
                return INF;
            }
            total += c as u64;
        }
        for cl in clauses {
            let best = cl
                .iter()
                .map(|l| if l.positive { self.cost[l.fact] } else { 0 })
                .min()
                .unwrap_or(INF);
            if best == INF {
                return INF;
            }
            total += best as u64;
        }
        total.min((INF - 1) as u64) as u32
    }

    /// `None` when the goal is relaxed-unreachable (a dead end).
    pub fn eval(&mut self, s: &State) -> Option<u32> {
        let task = self.task;
        self.cost.iter_mut().for_each(|c| *c = INF);
        for f in s.iter() {
            self.cost[f] = 0;
        }
        loop {
            let mut changed = false;
            for a in &task.actions {
                let pre = self.sum(&a.pre.pos, &a.pre.clauses);
                if pre == INF {
                    continue;
                }
                let c = pre.saturating_add(1);
                for &f in &a.add {
                    if c < self.cost[f] {
                        self.cost[f] = c;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let h = self.sum(&task.goal.pos, &task.goal.clauses);
        if h == INF {
            return None;
        }
        // Keep h = 0 exactly on goal states, even when the goal has
        // negative literals the relaxation ignores.
        if h == 0 && !task.goal_satisfied(s) {
            return Some(1);
        }
        Some(h)
    }
}

/// Number of unsatisfied goal literals and clauses.
pub fn goal_count(task: &GroundedTask, s: &State) -> u32 {
    let g = &task.goal;
    let pos = g.pos.iter().filter(|&&f| !s.contains(f)).count();
    let neg = g.neg.iter().filter(|&&f| s.contains(f)).count();
    let cl = g
        .clauses
        .iter()
        .filter(|c| !c.iter().any(|l| l.holds(s)))
        .count();
    (pos + neg + cl) as u32
}
