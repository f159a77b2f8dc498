//! One entry point for every exact table.

use super::dyck::dyck_deg_counts;
use super::helix::hel_stm_counts;
use super::motzkin::motzkin_joint_counts;
use super::pfold::{pfold_joint_probs, PfoldParams};
use super::{AnyTable, CountTable, Model, Stat, Weight};
use crate::error::{Error, Result};

/// Exact distribution of `stat` at size `n` (Dyck size is the semilength).
///
/// Joint tables are keyed `[deg, unp]` for every model. Pfold tables are
/// conditional on length `n`; `p` defaults to the standard parameters.
pub fn exact_counts(
    model: Model,
    n: usize,
    stat: Stat,
    p: Option<&PfoldParams>,
) -> Result<AnyTable> {
    match stat {
        Stat::Hel | Stat::Stm | Stat::StemHelices => hel_stm_counts(model, n, stat, p),
        Stat::Ete => Err(Error::UnsupportedCombination { model, stat }),
        _ => Ok(match model {
            Model::Dyck => {
                let joint = dyck_deg_counts(n).map_keys(vec![Stat::Deg, Stat::Unp], |k| vec![k[0], 0]);
                AnyTable::Exact(project(&joint, stat))
            }
            Model::Motzkin => AnyTable::Exact(project(&motzkin_joint_counts(n), stat)),
            Model::Pfold => {
                let params = p.copied().unwrap_or_default();
                let joint = pfold_joint_probs(n, &params)?
                    .map_keys(vec![Stat::Deg, Stat::Unp], |k| vec![k[1], k[0]]);
                AnyTable::Real(project(&joint, stat))
            }
        }),
    }
}

/// Exterior statistic `stat` from a `[deg, unp]` table.
fn project<W: Weight>(joint: &CountTable<W>, stat: Stat) -> CountTable<W> {
    match stat {
        Stat::Joint => joint.clone(),
        Stat::Deg => joint.marginal(0),
        Stat::Unp => joint.marginal(1),
        Stat::Chn => joint.map_keys(vec![stat], |k| vec![(k[0] + k[1]).saturating_sub(1)]),
        Stat::Len => joint.map_keys(vec![stat], |k| vec![2 * k[0] + k[1]]),
        _ => unreachable!("not an exterior statistic"),
    }
}
