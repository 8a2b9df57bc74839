//! Patches cut from a segmentation and the directional subset used by the
//! scaling analysis.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{FirmId, Side, SignedSeries, StockId};
use crate::segment::Segmentation;

pub const DEFAULT_THETA: f64 = 0.75;
pub const DEFAULT_MIN_TRADES: usize = 10;

/// Aggregates of one segment `[start, end)` of a signed series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Patch {
    pub firm: FirmId,
    pub stock: StockId,
    pub start: usize,
    pub end: usize,
    pub v_buy: f64,
    pub v_sell: f64,
    pub v_total: f64,
    pub n_buy: usize,
    pub n_sell: usize,
    pub t_first: u64,
    pub t_last: u64,
}

impl Patch {
    pub fn n_trades(&self) -> usize {
        self.n_buy + self.n_sell
    }

    pub fn duration(&self) -> u64 {
        self.t_last - self.t_first
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Direction {
    Buy,
    Sell,
    NonDirectional,
}

/// Scaling variables of a directional patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Variable {
    /// Duration `T` in seconds.
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    Duration,
    /// Dominant-side trade count `N_m`.
    #[cfg_attr(feature = "serde", serde(rename = "N_m"))]
    Trades,
    /// Dominant-side value `V_m`.
    #[cfg_attr(feature = "serde", serde(rename = "V_m"))]
    Value,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Duration, Variable::Trades, Variable::Value];

    pub fn label(self) -> &'static str {
        match self {
            Variable::Duration => "T",
            Variable::Trades => "N_m",
            Variable::Value => "V_m",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.label() == label)
    }
}

/// A patch dominated by one side, with its scaling variables.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DirectionalPatch {
    pub patch: Patch,
    pub side: Side,
    /// Seconds from the first to the last trade.
    pub duration: u64,
    /// Number of dominant-side trades.
    pub n_trades: usize,
    /// Dominant-side traded value.
    pub value: f64,
}

impl DirectionalPatch {
    pub fn get(&self, var: Variable) -> f64 {
        match var {
            Variable::Duration => self.duration as f64,
            Variable::Trades => self.n_trades as f64,
            Variable::Value => self.value,
        }
    }
}

pub fn cut_patches(series: &SignedSeries, seg: &Segmentation) -> Result<Vec<Patch>> {
    seg.validate(series.len())?;
    Ok(seg
        .segments()
        .map(|(start, end)| {
            let mut p = Patch {
                firm: series.firm.clone(),
                stock: series.stock.clone(),
                start,
                end,
                v_buy: 0.0,
                v_sell: 0.0,
                v_total: 0.0,
                n_buy: 0,
                n_sell: 0,
                t_first: series.timestamps[start],
                t_last: series.timestamps[end - 1],
            };
            for &v in &series.values[start..end] {
                if v > 0.0 {
                    p.v_buy += v;
                    p.n_buy += 1;
                } else {
                    p.v_sell -= v;
                    p.n_sell += 1;
                }
            }
            p.v_total = p.v_buy + p.v_sell;
            p
        })
        .collect())
}

pub fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.5 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("theta", "must lie in (0.5, 1]"))
    }
}

/// Buy iff `V_b / V > theta`, Sell iff `V_s / V > theta`.
pub fn classify(patch: &Patch, theta: f64) -> Direction {
    if !(patch.v_total > 0.0) {
        return Direction::NonDirectional;
    }
    if patch.v_buy / patch.v_total > theta {
        Direction::Buy
    } else if patch.v_sell / patch.v_total > theta {
        Direction::Sell
    } else {
        Direction::NonDirectional
    }
}

/// Promote a patch to a directional one, if it is directional at `theta`.
pub fn to_directional(patch: &Patch, theta: f64) -> Option<DirectionalPatch> {
    let (side, n_trades, value) = match classify(patch, theta) {
        Direction::Buy => (Side::Buy, patch.n_buy, patch.v_buy),
        Direction::Sell => (Side::Sell, patch.n_sell, patch.v_sell),
        Direction::NonDirectional => return None,
    };
    Some(DirectionalPatch {
        patch: patch.clone(),
        side,
        duration: patch.duration(),
        n_trades,
        value,
    })
}

/// Directional patches holding at least `min_trades` trades of either side.
pub fn directional_patches(
    series: &SignedSeries,
    seg: &Segmentation,
    theta: f64,
    min_trades: usize,
) -> Result<Vec<DirectionalPatch>> {
    check_theta(theta)?;
    Ok(cut_patches(series, seg)?
        .iter()
        .filter(|p| p.n_trades() >= min_trades)
        .filter_map(|p| to_directional(p, theta))
        .collect())
}
