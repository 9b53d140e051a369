//! End-to-end verification of the homomorphism-counting theorems: a logic
//! verdict per pair, hom-count vectors over the matching resource-bounded
//! class, and aggregated sweeps.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{enumerate_structures, ClassKind, ClassSpec, Enumerated};
use crate::error::{Error, Result};
use crate::game::equiv_counting;
use crate::homcount::{hom_count, pointed_hom_count};
use crate::structure::{iso_check, Signature};
use crate::wl::graded_types;

/// The homomorphism-counting theorems the harness can exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// isomorphism vs all structures
    Lovasz,
    /// counting logic of quantifier depth n vs tree-depth <= n
    Grohe,
    /// counting logic of width k vs tree-width <= k-1
    Dvorak,
    /// depth n and width k vs k-pebble covers of height <= n
    Ckn,
    /// graded modal logic of depth k vs synchronization trees of height <= k
    Modal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TheoremParams {
    /// quantifier depth (grohe, ckn) or modal depth (modal)
    pub depth: Option<usize>,
    /// variable width (dvorak, ckn)
    pub width: Option<usize>,
}

impl Theorem {
    pub fn name(&self) -> &'static str {
        match self {
            Theorem::Lovasz => "lovasz",
            Theorem::Grohe => "grohe",
            Theorem::Dvorak => "dvorak",
            Theorem::Ckn => "ckn",
            Theorem::Modal => "modal",
        }
    }

    /// The witness class the theorem quantifies over, at the given size cap.
    pub fn witness_class(
        &self,
        params: &TheoremParams,
        signature: &Signature,
        simple_graphs: bool,
        witness_cap: usize,
    ) -> Result<ClassSpec> {
        let kind = match self {
            Theorem::Lovasz => ClassKind::All,
            Theorem::Grohe => ClassKind::TreeDepth(params.depth.ok_or_else(|| {
                Error::InvalidParameter("grohe needs a depth parameter".to_string())
            })?),
            Theorem::Dvorak => {
                let k = params.width.ok_or_else(|| {
                    Error::InvalidParameter("dvorak needs a width parameter".to_string())
                })?;
                if k == 0 {
                    return Err(Error::InvalidParameter("width must be >= 1".to_string()));
                }
                ClassKind::TreeWidth(k - 1)
            }
            Theorem::Ckn => {
                let k = params.width.ok_or_else(|| {
                    Error::InvalidParameter("ckn needs a width parameter".to_string())
                })?;
                let n = params.depth.ok_or_else(|| {
                    Error::InvalidParameter("ckn needs a depth parameter".to_string())
                })?;
                ClassKind::PebbleHeight(k, n)
            }
            Theorem::Modal => ClassKind::SyncTree(params.depth.ok_or_else(|| {
                Error::InvalidParameter("modal needs a depth parameter".to_string())
            })?),
        };
        Ok(match (self, simple_graphs) {
            (Theorem::Modal, _) => ClassSpec::pointed(kind, signature.clone(), witness_cap),
            (_, true) => ClassSpec::simple_graphs(kind, witness_cap),
            (_, false) => ClassSpec::general(kind, signature.clone(), witness_cap),
        })
    }

    /// The logic-side verdict for one pair.
    pub fn logic_verdict(
        &self,
        a: &Enumerated,
        b: &Enumerated,
        params: &TheoremParams,
    ) -> Result<bool> {
        match self {
            Theorem::Lovasz => Ok(iso_check(&a.structure, &b.structure).is_some()),
            Theorem::Grohe => equiv_counting(&a.structure, &b.structure, params.depth, None),
            Theorem::Dvorak => equiv_counting(&a.structure, &b.structure, None, params.width),
            Theorem::Ckn => {
                equiv_counting(&a.structure, &b.structure, params.depth, params.width)
            }
            Theorem::Modal => {
                let k = params.depth.ok_or_else(|| {
                    Error::InvalidParameter("modal needs a depth parameter".to_string())
                })?;
                crate::wl::modal_equiv(&a.pointed()?, &b.pointed()?, k)
            }
        }
    }
}

/// Outcome classification of one verified pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// logic says equivalent and every witness count agrees
    AgreeEquivalent,
    /// logic says inequivalent and a distinguishing witness was found
    AgreeDistinguished,
    /// logic says inequivalent but no witness below the cap
    Exhausted,
    /// logic says equivalent yet some witness distinguishes: a refutation
    Failure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    /// identifier of the witness in its enumeration
    pub id: String,
    /// index in the witness stream
    pub index: usize,
    pub counts: (u64, u64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub a: String,
    pub b: String,
    pub logic: bool,
    pub agree: bool,
    pub witness: Option<WitnessReport>,
    pub exhausted: bool,
    /// size bound the witness scan reached
    pub exhausted_at: usize,
    pub outcome: Outcome,
    #[serde(skip)]
    pub timing_ms: u128,
}

fn classify(logic: bool, witness: Option<&WitnessReport>) -> Outcome {
    match (logic, witness) {
        (true, None) => Outcome::AgreeEquivalent,
        (true, Some(_)) => Outcome::Failure,
        (false, Some(_)) => Outcome::AgreeDistinguished,
        (false, None) => Outcome::Exhausted,
    }
}

/// Hom counts from every witness into one target.
fn hom_vector(witnesses: &[Enumerated], target: &Enumerated) -> Result<Vec<u64>> {
    witnesses
        .iter()
        .map(|w| match (w.point, target.point) {
            (Some(_), Some(_)) => pointed_hom_count(&w.pointed()?, &target.pointed()?),
            (None, None) => hom_count(&w.structure, &target.structure),
            _ => Err(Error::MalformedInput(
                "pointedness of witnesses and targets must agree".to_string(),
            )),
        })
        .collect()
}

/// Verify one theorem instance on a single pair: decide the logic side, then
/// scan the witness class for a distinguishing hom count.
pub fn verify_theorem(
    theorem: Theorem,
    a: &Enumerated,
    b: &Enumerated,
    params: &TheoremParams,
    witness_cap: usize,
    simple_graphs: bool,
    enum_cap: usize,
) -> Result<VerificationReport> {
    let class = theorem.witness_class(params, a.structure.signature(), simple_graphs, witness_cap)?;
    let witnesses = enumerate_structures(&class, enum_cap)?;
    let started = Instant::now();
    let logic = theorem.logic_verdict(a, b, params)?;
    let va = hom_vector(&witnesses, a)?;
    let vb = hom_vector(&witnesses, b)?;
    Ok(assemble_report(a, b, logic, &witnesses, &va, &vb, witness_cap, started))
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    a: &Enumerated,
    b: &Enumerated,
    logic: bool,
    witnesses: &[Enumerated],
    va: &[u64],
    vb: &[u64],
    witness_cap: usize,
    started: Instant,
) -> VerificationReport {
    let witness = va
        .iter()
        .zip(vb.iter())
        .position(|(x, y)| x != y)
        .map(|i| WitnessReport { id: witnesses[i].id.clone(), index: i, counts: (va[i], vb[i]) });
    let outcome = classify(logic, witness.as_ref());
    VerificationReport {
        a: a.id.clone(),
        b: b.id.clone(),
        logic,
        agree: matches!(outcome, Outcome::AgreeEquivalent | Outcome::AgreeDistinguished),
        witness,
        exhausted: matches!(outcome, Outcome::Exhausted),
        exhausted_at: witness_cap,
        outcome,
        timing_ms: started.elapsed().as_millis(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub pairs: usize,
    pub agree_equivalent: usize,
    pub agree_distinguished: usize,
    pub exhausted: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub theorem: Theorem,
    pub params: TheoremParams,
    pub universe: Vec<String>,
    pub witness_cap: usize,
    pub pairs: Vec<VerificationReport>,
    pub summary: SweepSummary,
}

/// Run a theorem over every unordered pair (including identical pairs) from
/// the enumerated universe. Hom vectors are computed once per structure and
/// pair verdicts run in a deterministic-order work pool.
pub fn sweep(
    theorem: Theorem,
    universe_spec: &ClassSpec,
    params: &TheoremParams,
    witness_cap: usize,
    enum_cap: usize,
) -> Result<SweepReport> {
    let universe = enumerate_structures(universe_spec, enum_cap)?;
    let class = theorem.witness_class(
        params,
        &universe_spec.signature,
        universe_spec.simple_graphs,
        witness_cap,
    )?;
    let witnesses = enumerate_structures(&class, enum_cap)?;

    // hom vectors once per universe member, in parallel
    let vectors: Vec<Vec<u64>> = universe
        .par_iter()
        .map(|t| hom_vector(&witnesses, t))
        .collect::<Result<Vec<_>>>()?;

    // precompute the modal fingerprints once; the games are run per pair
    let modal_types: Option<Vec<String>> = match theorem {
        Theorem::Modal => {
            let k = params.depth.ok_or_else(|| {
                Error::InvalidParameter("modal needs a depth parameter".to_string())
            })?;
            Some(
                universe
                    .iter()
                    .map(|t| {
                        let p = t.pointed()?;
                        Ok(graded_types(&p.structure, k)[p.point].clone())
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        _ => None,
    };

    let index_pairs: Vec<(usize, usize)> = (0..universe.len())
        .flat_map(|i| (i..universe.len()).map(move |j| (i, j)))
        .collect();
    let reports: Vec<VerificationReport> = index_pairs
        .par_iter()
        .map(|&(i, j)| -> Result<VerificationReport> {
            let started = Instant::now();
            let logic = match &modal_types {
                Some(types) => types[i] == types[j],
                None => theorem.logic_verdict(&universe[i], &universe[j], params)?,
            };
            Ok(assemble_report(
                &universe[i],
                &universe[j],
                logic,
                &witnesses,
                &vectors[i],
                &vectors[j],
                witness_cap,
                started,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = SweepSummary {
        pairs: reports.len(),
        agree_equivalent: reports.iter().filter(|r| r.outcome == Outcome::AgreeEquivalent).count(),
        agree_distinguished: reports
            .iter()
            .filter(|r| r.outcome == Outcome::AgreeDistinguished)
            .count(),
        exhausted: reports.iter().filter(|r| r.outcome == Outcome::Exhausted).count(),
        failures: reports.iter().filter(|r| r.outcome == Outcome::Failure).count(),
    };
    Ok(SweepReport {
        theorem,
        params: *params,
        universe: universe.iter().map(|t| t.id.clone()).collect(),
        witness_cap,
        pairs: reports,
        summary,
    })
}
