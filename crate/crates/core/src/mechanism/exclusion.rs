use crate::costmodel::Dominance;
use crate::error::{config, Result};

use super::{ProcurementProblem, Solution};

/// Best admissible set found by [`ProcurementProblem::exclusion_search`].
#[derive(Debug, Clone)]
pub struct ExclusionResult {
    pub admissible: Vec<usize>,
    pub solution: Solution,
    pub evaluated: usize,
    /// The budget ran out before every candidate set was tried.
    pub heuristic: bool,
}

impl ProcurementProblem {
    /// Searches admissible sets for the one maximizing the buyer's utility.
    ///
    /// Candidates are the non-empty sets closed upward under the dominance
    /// order (a kept type keeps every better type), or all non-empty subsets
    /// when no pair of types is ordered. The full set is tried first and only
    /// a strict improvement replaces the incumbent.
    pub fn exclusion_search(&self, max_subsets: usize) -> Result<ExclusionResult> {
        let n = self.space().len();
        if n > 30 {
            return Err(config(format!("exclusion search over {n} types is not enumerable")));
        }
        if max_subsets == 0 {
            return Err(config("exclusion search budget must be at least one subset"));
        }
        let pairs = self.dominance_pairs(&self.all_types());
        let full: u64 = (1u64 << n) - 1;
        let upward_closed = |mask: u64| {
            pairs.iter().all(|&(better, worse)| {
                debug_assert_eq!(self.dominance(better, worse), Dominance::Better);
                mask & (1 << worse) == 0 || mask & (1 << better) != 0
            })
        };
        let candidates = (1..=full).rev().filter(|&m| upward_closed(m));

        let mut best: Option<(Vec<usize>, Solution)> = None;
        let mut evaluated = 0;
        let mut heuristic = false;
        for mask in candidates {
            if evaluated == max_subsets {
                heuristic = true;
                break;
            }
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sol = self.solve(Some(&subset))?;
            evaluated += 1;
            let better = match &best {
                None => true,
                Some((_, b)) => sol.outcome.buyer_utility > b.outcome.buyer_utility,
            };
            if better {
                best = Some((subset, sol));
            }
        }
        let (admissible, solution) = best.expect("the full set is always a candidate");
        Ok(ExclusionResult {
            admissible,
            solution,
            evaluated,
            heuristic,
        })
    }
}
