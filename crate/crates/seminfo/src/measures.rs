//! Classical and semantic information measures.
//!
//! Everything is log base 2 with `0 log 0 = 0`. Classical quantities are in
//! bits; quantities computed from synonymous cells are in sebits. Throughout
//! this module the row variable of a [`JointModel`] is called `U` and the
//! column variable `V`.
//!
//! The semantic entropy of a partitioned variable is the entropy of its cell
//! masses, `Hs(U~) = -sum_is q_is log2 q_is` with `q_is = sum_{i in cell} p(u_i)`,
//! and satisfies `Hs(U~) <= H(U)`. The joint semantic entropy uses the
//! product partition. Semantic conditional entropy conditions on the
//! *syntactic* symbol of the other axis:
//! `Hs(V~|U) = -sum_i sum_js p(u_i, V_js) log2 p(V_js|u_i)`.
//!
//! Two semantic mutual informations bracket the classical one:
//!
//! - up:   `Is_up(U~;V~) = H(U) + H(V) - Hs(U~,V~) >= I(U;V)`
//! - down: `Is_down(U~;V~) = Hs(U~) + Hs(V~) - H(U,V) <= I(U;V)`
//!
//! The down measure can be negative; [`down_semantic_mi`] reports the raw
//! value and its clamp at zero. Clamping is applied only to reported values,
//! never inside derivations.

use crate::model::{joint_cell_mass, semantic_marginal, JointModel, SemanticVariable};

/// Numerical slack allowed when auditing the chain inequalities.
pub const CHAIN_SLACK: f64 = 1e-9;

pub(crate) fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy `-sum p log2 p` of a probability vector, in bits.
///
/// Entries are trusted to be nonnegative; zeros contribute nothing, so the
/// measure is continuous as any probability tends to zero.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().copied().map(xlog2).sum::<f64>() + 0.0
}

/// The classical joint measures of a two-variable model, all in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalJointMeasures {
    pub h_row: f64,
    pub h_col: f64,
    pub h_joint: f64,
    /// `H(U|V) = H(U,V) - H(V)`.
    pub h_row_given_col: f64,
    /// `H(V|U) = H(U,V) - H(U)`.
    pub h_col_given_row: f64,
    /// `I(U;V) = H(U) + H(V) - H(U,V)`.
    pub mi: f64,
}

pub fn classical_joint_measures(jm: &JointModel) -> ClassicalJointMeasures {
    let h_row = entropy(jm.row_marginal().probs());
    let h_col = entropy(jm.col_marginal().probs());
    let h_joint = -jm
        .probs()
        .iter()
        .flatten()
        .copied()
        .map(xlog2)
        .sum::<f64>()
        + 0.0;
    ClassicalJointMeasures {
        h_row,
        h_col,
        h_joint,
        h_row_given_col: h_joint - h_col,
        h_col_given_row: h_joint - h_row,
        mi: h_row + h_col - h_joint,
    }
}

/// Semantic entropy `Hs(U~)` in sebits: the entropy of the cell masses.
pub fn semantic_entropy(sv: &SemanticVariable) -> f64 {
    entropy(semantic_marginal(sv).probs())
}

/// Joint semantic entropy `Hs(U~,V~)` in sebits: the entropy of the
/// cell-mass matrix under the product partition.
pub fn semantic_joint_entropy(jm: &JointModel) -> f64 {
    let mass = joint_cell_mass(jm);
    -mass.iter().flatten().copied().map(xlog2).sum::<f64>() + 0.0
}

/// Which axis carries the conditioning (syntactic) variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

/// Semantic conditional entropy in sebits.
///
/// `given = Axis::Row` conditions on the syntactic row symbol and yields
/// `Hs(V~|U)`; `given = Axis::Col` yields `Hs(U~|V)`. Note the conditioning
/// side stays syntactic; only the predicted side is grouped into cells.
pub fn semantic_conditional_entropy(jm: &JointModel, given: Axis) -> f64 {
    let mut total = 0.0;
    match given {
        Axis::Row => {
            let row_marginal = jm.row_marginal();
            for i in 0..jm.rows() {
                let pi = row_marginal.prob(i);
                if pi <= 0.0 {
                    continue;
                }
                for cell in jm.col_partition().cells() {
                    let mass: f64 = cell.iter().map(|&j| jm.prob(i, j)).sum();
                    if mass > 0.0 {
                        total -= mass * (mass / pi).log2();
                    }
                }
            }
        }
        Axis::Col => {
            let col_marginal = jm.col_marginal();
            for j in 0..jm.cols() {
                let pj = col_marginal.prob(j);
                if pj <= 0.0 {
                    continue;
                }
                for cell in jm.row_partition().cells() {
                    let mass: f64 = cell.iter().map(|&i| jm.prob(i, j)).sum();
                    if mass > 0.0 {
                        total -= mass * (mass / pj).log2();
                    }
                }
            }
        }
    }
    total + 0.0
}

/// Up semantic mutual information `Is_up = H(U) + H(V) - Hs(U~,V~)`, in
/// sebits. Always at least `I(U;V)`.
pub fn up_semantic_mi(jm: &JointModel) -> f64 {
    let cm = classical_joint_measures(jm);
    cm.h_row + cm.h_col - semantic_joint_entropy(jm)
}

/// Down semantic mutual information `Is_down = Hs(U~) + Hs(V~) - H(U,V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownSemanticMi {
    /// The raw value; may be negative.
    pub raw: f64,
    /// `max(raw, 0)`, the value to report.
    pub clamped: f64,
}

pub fn down_semantic_mi(jm: &JointModel) -> DownSemanticMi {
    let cm = classical_joint_measures(jm);
    let raw = semantic_entropy(&jm.row_variable()) + semantic_entropy(&jm.col_variable())
        - cm.h_joint;
    DownSemanticMi {
        raw,
        clamped: raw.max(0.0),
    }
}

/// Every classical and semantic measure of a joint model in one pass.
/// Classical fields are bits, semantic fields sebits.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub h_u: f64,
    pub h_v: f64,
    pub h_uv: f64,
    pub h_u_given_v: f64,
    pub h_v_given_u: f64,
    pub i_uv: f64,
    pub hs_u: f64,
    pub hs_v: f64,
    pub hs_uv: f64,
    pub hs_u_given_v: f64,
    pub hs_v_given_u: f64,
    pub i_up: f64,
    pub i_down_raw: f64,
    /// `max(i_down_raw, 0)`.
    pub i_down: f64,
}

pub fn measure_report(jm: &JointModel) -> MeasureReport {
    let cm = classical_joint_measures(jm);
    let hs_u = semantic_entropy(&jm.row_variable());
    let hs_v = semantic_entropy(&jm.col_variable());
    let hs_uv = semantic_joint_entropy(jm);
    let i_down_raw = hs_u + hs_v - cm.h_joint;
    MeasureReport {
        h_u: cm.h_row,
        h_v: cm.h_col,
        h_uv: cm.h_joint,
        h_u_given_v: cm.h_row_given_col,
        h_v_given_u: cm.h_col_given_row,
        i_uv: cm.mi,
        hs_u,
        hs_v,
        hs_uv,
        hs_u_given_v: semantic_conditional_entropy(jm, Axis::Col),
        hs_v_given_u: semantic_conditional_entropy(jm, Axis::Row),
        i_up: cm.h_row + cm.h_col - hs_uv,
        i_down_raw,
        i_down: i_down_raw.max(0.0),
    }
}

/// One labeled value of an inequality chain. `holds` records whether the
/// value is at least its predecessor, up to [`CHAIN_SLACK`]; the first entry
/// of a chain holds trivially.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub label: &'static str,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub name: &'static str,
    pub entries: Vec<ChainEntry>,
}

impl Chain {
    fn build(name: &'static str, values: Vec<(&'static str, f64)>) -> Chain {
        let mut entries = Vec::with_capacity(values.len());
        let mut prev = f64::NEG_INFINITY;
        for (label, value) in values {
            entries.push(ChainEntry {
                label,
                value,
                holds: value >= prev - CHAIN_SLACK,
            });
            prev = value;
        }
        Chain { name, entries }
    }

    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }
}

/// The audited chain inequalities of a joint model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAudit {
    pub chains: Vec<Chain>,
    pub all_hold: bool,
}

/// Audits the joint-entropy chain
/// `Hs(U~) + Hs(V~|U) <= Hs(U~,V~) <= H(U) + Hs(V~|U) <= H(U,V)`
/// and the mutual-information chain
/// `Is_down <= Hs(V~) - H(V|U) <= I(U;V) <= H(V) - Hs(V~|U) <= Is_up`,
/// in both orientations, as ordered `(label, value, holds)` lists.
pub fn chain_rule_audit(jm: &JointModel) -> ChainAudit {
    let r = measure_report(jm);
    let chains = vec![
        Chain::build(
            "joint_entropy_given_u",
            vec![
                ("Hs(U~)+Hs(V~|U)", r.hs_u + r.hs_v_given_u),
                ("Hs(U~,V~)", r.hs_uv),
                ("H(U)+Hs(V~|U)", r.h_u + r.hs_v_given_u),
                ("H(U,V)", r.h_uv),
            ],
        ),
        Chain::build(
            "joint_entropy_given_v",
            vec![
                ("Hs(V~)+Hs(U~|V)", r.hs_v + r.hs_u_given_v),
                ("Hs(U~,V~)", r.hs_uv),
                ("H(V)+Hs(U~|V)", r.h_v + r.hs_u_given_v),
                ("H(U,V)", r.h_uv),
            ],
        ),
        Chain::build(
            "mutual_information_via_v",
            vec![
                ("Is_down", r.i_down_raw),
                ("Hs(V~)-H(V|U)", r.hs_v - r.h_v_given_u),
                ("I(U;V)", r.i_uv),
                ("H(V)-Hs(V~|U)", r.h_v - r.hs_v_given_u),
                ("Is_up", r.i_up),
            ],
        ),
        Chain::build(
            "mutual_information_via_u",
            vec![
                ("Is_down", r.i_down_raw),
                ("Hs(U~)-H(U|V)", r.hs_u - r.h_u_given_v),
                ("I(U;V)", r.i_uv),
                ("H(U)-Hs(U~|V)", r.h_u - r.hs_u_given_v),
                ("Is_up", r.i_up),
            ],
        ),
    ];
    let all_hold = chains.iter().all(Chain::holds);
    ChainAudit { chains, all_hold }
}
