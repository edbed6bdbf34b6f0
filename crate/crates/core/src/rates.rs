//! Achievable and secrecy rates for RSMA and power-domain NOMA, total power
//! draw, and secrecy energy efficiency.
//!
//! All rates use the optical-intensity capacity bound
//! `B·log2(1 + (e/2π)·S / (I + N_o·B))`, where the signal term `S` and the
//! interference term `I` both scale with the squared photocurrent gain
//! `(R_PD·hᵀg)²`.

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelState;
use crate::error::{invalid, Error, Result};
use crate::scenario::{LinkBudget, SystemParameters};

/// `e / 2π`, the intensity-modulation SNR penalty.
pub const INTENSITY_SNR_FACTOR: f64 = E / (2.0 * PI);

/// Circuit power draw, watts. Defaults are the reference hardware figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConsumptionModel {
    pub dac: f64,
    pub filter: f64,
    pub power_amplifier: f64,
    pub led_driver: f64,
    pub tx_circuit: f64,
    /// Actuation power per RIS element.
    pub per_element: f64,
    pub adc: f64,
    pub tia: f64,
    pub rx_circuit: f64,
}

impl Default for PowerConsumptionModel {
    fn default() -> Self {
        Self {
            dac: 0.175,
            filter: 0.0025,
            power_amplifier: 0.280,
            led_driver: 2.758,
            tx_circuit: 3.250,
            per_element: 0.100,
            adc: 0.095,
            tia: 2.500,
            rx_circuit: 0.0019,
        }
    }
}

impl PowerConsumptionModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("P_DAC", self.dac),
            ("P_Filter", self.filter),
            ("P_PA", self.power_amplifier),
            ("P_Driver", self.led_driver),
            ("P_TCircuit", self.tx_circuit),
            ("P_Element", self.per_element),
            ("P_ADC", self.adc),
            ("P_TIA", self.tia),
            ("P_RCircuit", self.rx_circuit),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "power draw must be non-negative"));
            }
        }
        Ok(())
    }

    /// Transmitter + RIS + receivers.
    pub fn total(&self, tx_power: f64, num_elements: usize, num_users: usize) -> f64 {
        let transmitter = tx_power + self.dac + self.filter + self.power_amplifier + self.led_driver + self.tx_circuit;
        let ris = self.per_element * num_elements as f64;
        let receivers = num_users as f64 * (self.adc + self.tia + self.filter + self.rx_circuit);
        transmitter + ris + receivers
    }
}

/// Total consumed power of the deployment, watts.
pub fn total_power(params: &SystemParameters) -> f64 {
    params
        .consumption
        .total(params.tx_power, params.num_elements, params.num_users)
}

/// Secrecy energy efficiency, bits/joule.
pub fn min_see(min_secrecy_rate: f64, total_power: f64) -> Result<f64> {
    if !(total_power > 0.0) {
        return Err(Error::Domain {
            name: "p_total",
            value: total_power,
            domain: "(0, inf)",
        });
    }
    Ok(min_secrecy_rate / total_power)
}

/// K×U binary RIS-to-user association, stored as one user index per element.
/// Every row therefore holds exactly one 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    assignment: Vec<usize>,
    num_users: usize,
}

impl AssociationMatrix {
    pub fn new(assignment: Vec<usize>, num_users: usize) -> Result<Self> {
        if let Some((k, &u)) = assignment.iter().enumerate().find(|(_, &u)| u >= num_users) {
            return Err(invalid(
                "G",
                format!("element {} assigned to user {} but U = {num_users}", k + 1, u + 1),
            ));
        }
        Ok(Self {
            assignment,
            num_users,
        })
    }

    /// Build from explicit 0/1 rows; each row must sum to exactly one.
    pub fn from_binary(rows: &[Vec<u8>]) -> Result<Self> {
        let num_users = rows.first().map_or(0, Vec::len);
        let mut assignment = Vec::with_capacity(rows.len());
        for (k, row) in rows.iter().enumerate() {
            if row.len() != num_users || row.iter().any(|&g| g > 1) {
                return Err(invalid("G", format!("row {} is not a 0/1 row of length {num_users}", k + 1)));
            }
            if row.iter().map(|&g| g as usize).sum::<usize>() != 1 {
                return Err(invalid("G", format!("row {} must serve exactly one user", k + 1)));
            }
            assignment.push(row.iter().position(|&g| g == 1).unwrap());
        }
        Ok(Self {
            assignment,
            num_users,
        })
    }

    pub fn to_binary(&self) -> Vec<Vec<u8>> {
        self.assignment
            .iter()
            .map(|&u| (0..self.num_users).map(|j| u8::from(j == u)).collect())
            .collect()
    }

    pub fn num_elements(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Column `g_u` as a 0/1 vector.
    pub fn column(&self, u: usize) -> Vec<f64> {
        self.assignment.iter().map(|&a| if a == u { 1.0 } else { 0.0 }).collect()
    }

    /// `(h_uᵀ g_u for each u, h_eᵀ g_u for each u)`.
    pub fn composite_gains(&self, channels: &ChannelState) -> (Vec<f64>, Vec<f64>) {
        let mut users = vec![0.0; self.num_users];
        let mut eve = vec![0.0; self.num_users];
        for (k, &u) in self.assignment.iter().enumerate() {
            users[u] += channels.users[u][k];
            eve[u] += channels.eve[k];
        }
        (users, eve)
    }
}

/// `hᵀg`.
pub fn composite_gain(h: &[f64], g: &[f64]) -> f64 {
    assert_eq!(h.len(), g.len(), "channel and association lengths differ");
    h.iter().zip(g).map(|(a, b)| a * b).sum()
}

fn stream_rate(link: &LinkBudget, gain: f64, signal: f64, interference: f64) -> f64 {
    let rg2 = (link.responsivity * gain).powi(2);
    let sinr = INTENSITY_SNR_FACTOR * rg2 * signal / (rg2 * interference + link.noise_power());
    link.bandwidth * sinr.ln_1p() / LN_2
}

/// RSMA power split: common stream `P0` plus one private stream per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsmaPowerAllocation {
    pub common: f64,
    pub private: Vec<f64>,
}

impl RsmaPowerAllocation {
    /// Checked constructor: all powers non-negative and `P0 + ΣP_u ≤ P_S`.
    pub fn new(common: f64, private: Vec<f64>, tx_power: f64) -> Result<Self> {
        if common < 0.0 || private.iter().any(|&p| !(p >= 0.0)) || !common.is_finite() {
            return Err(invalid("P", "stream powers must be non-negative"));
        }
        let a = Self { common, private };
        if a.total() > tx_power * (1.0 + 1e-12) {
            return Err(invalid("P", format!("{} W exceeds P_S = {tx_power} W", a.total())));
        }
        Ok(a)
    }

    pub fn total(&self) -> f64 {
        self.common + self.private.iter().sum::<f64>()
    }

    fn private_sum(&self) -> f64 {
        self.private.iter().sum()
    }

    fn private_sum_except(&self, u: usize) -> f64 {
        self.private
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != u)
            .map(|(_, p)| p)
            .sum()
    }

    fn check_index(&self, u: usize) -> Result<()> {
        if u >= self.private.len() {
            return Err(Error::IndexOutOfRange {
                what: "private streams",
                index: u,
                len: self.private.len(),
            });
        }
        Ok(())
    }
}

/// Rate at which a receiver with composite gain `gain` decodes the common stream.
pub fn rsma_common_rate(link: &LinkBudget, gain: f64, alloc: &RsmaPowerAllocation) -> f64 {
    stream_rate(link, gain, alloc.common, alloc.private_sum())
}

/// Rate of user `u`'s private stream after the common stream is removed.
pub fn rsma_private_rate(link: &LinkBudget, gain: f64, alloc: &RsmaPowerAllocation, u: usize) -> Result<f64> {
    alloc.check_index(u)?;
    Ok(stream_rate(link, gain, alloc.private[u], alloc.private_sum_except(u)))
}

/// `(common, private)` rates Eve achieves on user `u`'s streams.
pub fn rsma_eve_rates(
    link: &LinkBudget,
    eve_gain: f64,
    alloc: &RsmaPowerAllocation,
    u: usize,
) -> Result<(f64, f64)> {
    Ok((
        rsma_common_rate(link, eve_gain, alloc),
        rsma_private_rate(link, eve_gain, alloc, u)?,
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsmaOptions {
    /// Cap every user's common rate at the weakest user's, so the common
    /// stream is decodable by all. Off by default.
    pub joint_common_decoding: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Rsma,
    Noma,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Rsma => "RSMA",
            Scheme::Noma => "NOMA",
        })
    }
}

/// One receiver's rates on one user's message. `common`/`private` are set for RSMA only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamRates {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub common: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub private: Option<f64>,
    pub total: f64,
}

impl StreamRates {
    fn single(total: f64) -> Self {
        Self {
            common: None,
            private: None,
            total,
        }
    }

    fn split(common: f64, private: f64) -> Self {
        Self {
            common: Some(common),
            private: Some(private),
            total: common + private,
        }
    }
}

/// Everything the secrecy objectives are computed from, indexed by original user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub per_user_rates: Vec<StreamRates>,
    pub eve_rates: Vec<StreamRates>,
    /// `[R_u - R_e→u]⁺` for each user.
    pub secrecy_rates: Vec<f64>,
    pub min_secrecy_rate: f64,
    /// Filled by [`RateReport::with_total_power`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub see: Option<f64>,
    /// NOMA decoding order, strongest first. Empty for RSMA.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sic_order: Vec<usize>,
}

impl RateReport {
    fn finish(scheme: Scheme, per_user_rates: Vec<StreamRates>, eve_rates: Vec<StreamRates>, sic_order: Vec<usize>) -> Self {
        let secrecy_rates: Vec<f64> = per_user_rates
            .iter()
            .zip(&eve_rates)
            .map(|(r, e)| (r.total - e.total).max(0.0))
            .collect();
        let min_secrecy_rate = secrecy_rates.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            scheme,
            per_user_rates,
            eve_rates,
            min_secrecy_rate: if min_secrecy_rate.is_finite() { min_secrecy_rate } else { 0.0 },
            secrecy_rates,
            see: None,
            sic_order,
        }
    }

    pub fn with_total_power(mut self, p_total: f64) -> Result<Self> {
        self.see = Some(min_see(self.min_secrecy_rate, p_total)?);
        Ok(self)
    }

    /// `scheme,min_secrecy_rate,see` followed by per-user totals.
    pub fn csv_header(num_users: usize) -> String {
        let mut cols = vec!["scheme".to_string(), "min_secrecy_rate".into(), "see".into()];
        for u in 1..=num_users {
            cols.push(format!("rate_u{u}"));
            cols.push(format!("eve_rate_u{u}"));
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.scheme.to_string(),
            self.min_secrecy_rate.to_string(),
            self.see.map(|v| v.to_string()).unwrap_or_default(),
        ];
        for (r, e) in self.per_user_rates.iter().zip(&self.eve_rates) {
            cols.push(r.total.to_string());
            cols.push(e.total.to_string());
        }
        cols.join(",")
    }
}

fn check_shapes(channels: &ChannelState, assoc: &AssociationMatrix, streams: usize) -> Result<()> {
    if channels.num_elements() != assoc.num_elements() {
        return Err(Error::SizeMismatch {
            what: "association rows",
            expected: channels.num_elements(),
            actual: assoc.num_elements(),
        });
    }
    if channels.num_users() != assoc.num_users() || streams != assoc.num_users() {
        return Err(Error::SizeMismatch {
            what: "users",
            expected: assoc.num_users(),
            actual: streams,
        });
    }
    Ok(())
}

pub fn rsma_report(
    link: &LinkBudget,
    channels: &ChannelState,
    assoc: &AssociationMatrix,
    alloc: &RsmaPowerAllocation,
    opts: RsmaOptions,
) -> Result<RateReport> {
    check_shapes(channels, assoc, alloc.private.len())?;
    let (user_gain, eve_gain) = assoc.composite_gains(channels);
    let mut common: Vec<f64> = user_gain.iter().map(|&g| rsma_common_rate(link, g, alloc)).collect();
    if opts.joint_common_decoding {
        let weakest = common.iter().copied().fold(f64::INFINITY, f64::min);
        common.iter_mut().for_each(|c| *c = weakest);
    }
    let mut users = Vec::with_capacity(user_gain.len());
    let mut eves = Vec::with_capacity(user_gain.len());
    for u in 0..user_gain.len() {
        users.push(StreamRates::split(common[u], rsma_private_rate(link, user_gain[u], alloc, u)?));
        let (ec, ep) = rsma_eve_rates(link, eve_gain[u], alloc, u)?;
        eves.push(StreamRates::split(ec, ep));
    }
    Ok(RateReport::finish(Scheme::Rsma, users, eves, Vec::new()))
}

/// Minimum over users of `[(R_c,u + R_p,u) − (R_c,e→u + R_p,e→u)]⁺`.
pub fn rsma_min_secrecy(
    link: &LinkBudget,
    channels: &ChannelState,
    assoc: &AssociationMatrix,
    alloc: &RsmaPowerAllocation,
) -> Result<f64> {
    Ok(rsma_report(link, channels, assoc, alloc, RsmaOptions::default())?.min_secrecy_rate)
}

/// `c_u = ε(1−ε)^(u−1)` for `u < U`, `c_U = (1−ε)^(U−1)`; sums to one.
pub fn noma_coefficients(epsilon: f64, num_users: usize) -> Result<Vec<f64>> {
    if !(epsilon > 0.5 && epsilon <= 1.0) {
        return Err(Error::Domain {
            name: "epsilon",
            value: epsilon,
            domain: "(0.5, 1]",
        });
    }
    if num_users == 0 {
        return Err(invalid("U", "must be at least 1"));
    }
    let rest = 1.0 - epsilon;
    Ok((0..num_users)
        .map(|i| {
            let tail = rest.powi(i as i32);
            if i + 1 < num_users {
                epsilon * tail
            } else {
                tail
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaPowerAllocation {
    pub epsilon: f64,
    pub coefficients: Vec<f64>,
}

impl NomaPowerAllocation {
    pub fn new(epsilon: f64, num_users: usize) -> Result<Self> {
        Ok(Self {
            epsilon,
            coefficients: noma_coefficients(epsilon, num_users)?,
        })
    }
}

fn check_rank(c: &[f64], rank: usize) -> Result<()> {
    if rank >= c.len() {
        return Err(Error::IndexOutOfRange {
            what: "NOMA coefficients",
            index: rank,
            len: c.len(),
        });
    }
    Ok(())
}

/// Decoding rate of the user in SIC position `rank` (0 = strongest, decoded
/// free of interference); users ahead of it in the order interfere.
pub fn noma_user_rate(link: &LinkBudget, gain: f64, c: &[f64], rank: usize) -> Result<f64> {
    check_rank(c, rank)?;
    let interference: f64 = c[..rank].iter().sum::<f64>() * link.tx_power;
    Ok(stream_rate(link, gain, c[rank] * link.tx_power, interference))
}

/// Eve's rate on the user in SIC position `rank`, with her own composite gain.
pub fn noma_eve_rate(link: &LinkBudget, eve_gain: f64, c: &[f64], rank: usize) -> Result<f64> {
    noma_user_rate(link, eve_gain, c, rank)
}

/// Users sorted by composite gain, strongest first; ties keep id order.
pub fn sic_order(composite: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..composite.len()).collect();
    order.sort_by(|&a, &b| composite[b].total_cmp(&composite[a]).then(a.cmp(&b)));
    order
}

/// NOMA rates with users re-ranked by their current composite gains.
pub fn noma_report(
    link: &LinkBudget,
    channels: &ChannelState,
    assoc: &AssociationMatrix,
    c: &[f64],
) -> Result<RateReport> {
    check_shapes(channels, assoc, c.len())?;
    let (user_gain, eve_gain) = assoc.composite_gains(channels);
    let order = sic_order(&user_gain);
    let mut users = vec![StreamRates::single(0.0); c.len()];
    let mut eves = users.clone();
    for (rank, &u) in order.iter().enumerate() {
        users[u] = StreamRates::single(noma_user_rate(link, user_gain[u], c, rank)?);
        eves[u] = StreamRates::single(noma_eve_rate(link, eve_gain[u], c, rank)?);
    }
    Ok(RateReport::finish(Scheme::Noma, users, eves, order))
}

/// Minimum over users of `[R_u − R_e→u]⁺`.
pub fn noma_min_secrecy(
    link: &LinkBudget,
    channels: &ChannelState,
    assoc: &AssociationMatrix,
    c: &[f64],
) -> Result<f64> {
    Ok(noma_report(link, channels, assoc, c)?.min_secrecy_rate)
}
