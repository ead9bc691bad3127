//! Differencing, its inverse, and optional demeaning.

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// A `d`-times differenced series with what is needed to undo it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Differenced {
    pub values: Vec<f64>,
    pub order: usize,
    /// First value of each intermediate series `x, dx, ..., d^{order-1} x`.
    pub heads: Vec<f64>,
    /// Last value of each intermediate series, in the same order.
    pub tails: Vec<f64>,
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn cumulate(start: f64, increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(start);
    let mut acc = start;
    for &d in increments {
        acc += d;
        out.push(acc);
    }
    out
}

/// Applies first differencing `order` times (0, 1 or 2).
pub fn difference(series: &[f64], order: usize) -> Result<Differenced> {
    if order > 2 {
        return Err(CliError::config(format!("difference order must be 0, 1 or 2, got {order}")));
    }
    if series.len() <= order {
        return Err(CliError::config(format!(
            "a series of length {} cannot be differenced {order} times",
            series.len()
        )));
    }
    let mut current = series.to_vec();
    let mut heads = Vec::with_capacity(order);
    let mut tails = Vec::with_capacity(order);
    for _ in 0..order {
        heads.push(current[0]);
        tails.push(current[current.len() - 1]);
        current = diff(&current);
    }
    Ok(Differenced {
        values: current,
        order,
        heads,
        tails,
    })
}

/// Rebuilds the original series from `values` and the stored heads.
pub fn undifference(values: &[f64], meta: &Differenced) -> Vec<f64> {
    meta.heads
        .iter()
        .rev()
        .fold(values.to_vec(), |acc, &head| cumulate(head, &acc))
}

impl Differenced {
    /// Integrates forecasts of the differenced series into forecasts of
    /// the original levels, continuing from the stored tails.
    pub fn integrate_forecast(&self, points: &[f64]) -> Vec<f64> {
        self.tails.iter().rev().fold(points.to_vec(), |acc, &tail| {
            let mut level = tail;
            acc.iter()
                .map(|&d| {
                    level += d;
                    level
                })
                .collect()
        })
    }
}

/// Sample mean, or 0 when not demeaning.
pub fn demean(series: &mut [f64], enabled: bool) -> f64 {
    if !enabled || series.is_empty() {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    for x in series.iter_mut() {
        *x -= mean;
    }
    mean
}
