//! Random engine operation sequences.
//!
//! Operations pick their targets by index into the current case and evidence
//! lists, so the same sequence can be replayed against different stores.

use std::collections::BTreeMap;
use std::path::Path;

use ftklipse_core::casework::{Case, CustodyEvent, FrontMatter, Operation, Region};
use ftklipse_core::toolkit::{plan_invocation, run_tool, ToolRegistry};
use ftklipse_core::{Casework, Error};
use rand::Rng;

#[derive(Debug, Clone)]
pub enum Op {
    CreateCase { title: String },
    Import { case: usize, len: usize, seed: u64 },
    Verify { evidence: usize },
    Note { evidence: usize, text: String, region: Option<(u64, u64)> },
    Extract { evidence: usize, offset: u64, length: u64 },
    Duplicate { evidence: usize },
    FrontMatter { case: usize, summary: String },
    Tool { evidence: usize, tool: String },
    /// A target that does not exist.
    Dangling { which: u8 },
}

#[derive(Debug, Clone, Copy)]
pub struct Mix {
    pub tools: bool,
}

pub fn random_op(rng: &mut impl Rng, mix: Mix) -> Op {
    let pick = rng.random_range(0..usize::MAX / 2);
    let roll = rng.random_range(0..100);
    match roll {
        0..=5 => Op::CreateCase { title: format!("case {}", rng.random_range(0..1000)) },
        6..=25 => Op::Import {
            case: pick,
            len: match rng.random_range(0..10) {
                0 => 0,
                1..=7 => rng.random_range(1..2048),
                _ => rng.random_range(2048..64 * 1024),
            },
            seed: rng.random(),
        },
        26..=40 => Op::Verify { evidence: pick },
        41..=55 => Op::Note {
            evidence: pick,
            text: match rng.random_range(0..8) {
                0 => "   ".to_string(),
                1 => "a & b <c> {d}_%".to_string(),
                _ => format!("note {}", rng.random_range(0..1_000_000)),
            },
            region: rng
                .random_bool(0.5)
                .then(|| (rng.random_range(0..4096), rng.random_range(0..512))),
        },
        56..=68 => Op::Extract {
            evidence: pick,
            offset: rng.random_range(0..4096),
            length: rng.random_range(0..4096),
        },
        69..=76 => Op::Duplicate { evidence: pick },
        77..=80 => Op::FrontMatter { case: pick, summary: format!("summary {}", rng.random::<u16>()) },
        81..=95 if mix.tools => {
            let tools = ["echo", "fail", "extract-head", "missing"];
            Op::Tool { evidence: pick, tool: tools[rng.random_range(0..tools.len())].to_string() }
        }
        _ => Op::Dangling { which: rng.random_range(0..4) },
    }
}

/// What an operation did, with wall-clock fields left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Case(u64),
    Evidence { id: u64, size: u64, hash: String },
    Verified(bool),
    Note(u64),
    FrontMatter,
    Tool { exit: Option<i32>, output: Option<u64>, ok: bool },
    Err(&'static str),
    Skipped,
}

fn err(e: Error) -> Outcome {
    Outcome::Err(e.code())
}

/// Evidence ids of all cases in id order.
pub fn all_evidence(work: &Casework) -> Vec<u64> {
    work.cases()
        .unwrap()
        .iter()
        .flat_map(|c| c.evidences.iter().map(|e| e.id))
        .collect()
}

pub fn apply(
    work: &Casework,
    op: &Op,
    scratch: &Path,
    tools: Option<&ToolRegistry>,
    principal: &str,
) -> Outcome {
    let cases = work.list_case_ids().unwrap();
    let evidence = all_evidence(work);
    let case_at = |i: usize| (!cases.is_empty()).then(|| cases[i % cases.len()]);
    let evidence_at = |i: usize| (!evidence.is_empty()).then(|| evidence[i % evidence.len()]);
    match op {
        Op::CreateCase { title } => match work.create_case(title, principal) {
            Ok(c) => Outcome::Case(c.id),
            Err(e) => err(e),
        },
        Op::Import { case, len, seed } => {
            let Some(case_id) = case_at(*case) else { return Outcome::Skipped };
            use rand::{RngCore, SeedableRng};
            let mut bytes = vec![0u8; *len];
            rand::rngs::StdRng::seed_from_u64(*seed).fill_bytes(&mut bytes);
            let path = scratch.join(format!("src_{seed:x}.bin"));
            std::fs::write(&path, &bytes).unwrap();
            match work.import_evidence(case_id, &path, principal) {
                Ok(e) => Outcome::Evidence { id: e.id, size: e.size_bytes, hash: e.reference_hash },
                Err(e) => err(e),
            }
        }
        Op::Verify { evidence } => {
            let Some(id) = evidence_at(*evidence) else { return Outcome::Skipped };
            match work.verify_evidence(id, principal) {
                Ok(v) => Outcome::Verified(v.ok),
                Err(e) => err(e),
            }
        }
        Op::Note { evidence, text, region } => {
            let Some(id) = evidence_at(*evidence) else { return Outcome::Skipped };
            let region = region.map(|(offset, length)| Region { offset, length });
            match work.add_note(id, principal, text, region) {
                Ok(n) => Outcome::Note(n.id),
                Err(e) => err(e),
            }
        }
        Op::Extract { evidence, offset, length } => {
            let Some(id) = evidence_at(*evidence) else { return Outcome::Skipped };
            match work.extract_region(id, *offset, *length, "region.bin", principal) {
                Ok(e) => Outcome::Evidence { id: e.id, size: e.size_bytes, hash: e.reference_hash },
                Err(e) => err(e),
            }
        }
        Op::Duplicate { evidence } => {
            let Some(id) = evidence_at(*evidence) else { return Outcome::Skipped };
            match work.duplicate_evidence(id, "copy.bin", principal) {
                Ok(e) => Outcome::Evidence { id: e.id, size: e.size_bytes, hash: e.reference_hash },
                Err(e) => err(e),
            }
        }
        Op::FrontMatter { case, summary } => {
            let Some(case_id) = case_at(*case) else { return Outcome::Skipped };
            let fm = FrontMatter { executive_summary: summary.clone(), ..FrontMatter::default() };
            match work.set_front_matter(case_id, fm) {
                Ok(_) => Outcome::FrontMatter,
                Err(e) => err(e),
            }
        }
        Op::Tool { evidence, tool } => {
            let Some(id) = evidence_at(*evidence) else { return Outcome::Skipped };
            let Some(reg) = tools else { return Outcome::Skipped };
            let manifest = reg.get(tool).expect("fixture tool");
            let ev = work.evidence(id).unwrap();
            let plan = match plan_invocation(manifest, &ev, &BTreeMap::new(), work.data_root()) {
                Ok(p) => p,
                Err(e) => return err(e),
            };
            match run_tool(work, &plan, principal) {
                Ok(r) => Outcome::Tool {
                    exit: r.exit_code,
                    output: r.output_evidence_id,
                    ok: r.post_verification.ok,
                },
                Err(Error::Launch { run, .. } | Error::Timeout { run, .. }) => Outcome::Tool {
                    exit: run.exit_code,
                    output: run.output_evidence_id,
                    ok: run.post_verification.ok,
                },
                Err(e) => err(e),
            }
        }
        Op::Dangling { which } => {
            let missing = 1 << 40;
            let r = match which {
                0 => work.verify_evidence(missing, principal).map(|_| ()),
                1 => work.case(missing).map(|_| ()),
                2 => work.add_note(missing, principal, "x", None).map(|_| ()),
                _ => work.extract_region(missing, 0, 1, "x", principal).map(|_| ()),
            };
            match r {
                Ok(()) => Outcome::Skipped,
                Err(e) => err(e),
            }
        }
    }
}

/// Copy of a case with every wall-clock field zeroed.
pub fn without_times(case: &Case) -> Case {
    let mut c = case.clone();
    c.created_at = 0;
    for e in &mut c.evidences {
        e.imported_at = 0;
        for n in &mut e.notes {
            n.created_at = 0;
        }
        for ev in &mut e.custody {
            ev.timestamp = 0;
        }
    }
    c
}

/// Custody list invariants for one evidence: seq runs 1..=n and timestamps
/// never decrease. Returns a description of the first violation.
pub fn custody_violation(list: &[CustodyEvent]) -> Option<String> {
    for (i, ev) in list.iter().enumerate() {
        if ev.seq != i as u64 + 1 {
            return Some(format!("event {i} has seq {}", ev.seq));
        }
        if i > 0 && ev.timestamp < list[i - 1].timestamp {
            return Some(format!("event {i} goes back in time"));
        }
    }
    match list.first() {
        Some(first) if !first.operation.is_origin() => {
            Some(format!("first event is {}", first.operation))
        }
        None => Some("empty custody list".to_string()),
        _ => None,
    }
}

/// How many custody events an outcome should add per evidence id.
pub fn expected_delta(op: &Op, outcome: &Outcome, target: Option<u64>) -> BTreeMap<u64, usize> {
    let mut d = BTreeMap::new();
    match (op, outcome) {
        (Op::Import { .. }, Outcome::Evidence { id, .. }) => {
            d.insert(*id, 1);
        }
        (Op::Verify { .. }, Outcome::Verified(_)) => {
            d.insert(target.unwrap(), 1);
        }
        // A missing file still leaves a `verified` event.
        (Op::Verify { .. }, Outcome::Err("missing_evidence")) => {
            d.insert(target.unwrap(), 1);
        }
        (Op::Note { .. }, Outcome::Note(_)) => {
            d.insert(target.unwrap(), 1);
        }
        (Op::Extract { .. } | Op::Duplicate { .. }, Outcome::Evidence { id, .. }) => {
            d.insert(target.unwrap(), 1);
            d.insert(*id, 1);
        }
        (Op::Tool { .. }, Outcome::Tool { output, .. }) => {
            d.insert(target.unwrap(), 1);
            if let Some(child) = output {
                d.insert(*child, 1);
            }
        }
        _ => {}
    }
    d
}

/// The evidence an operation targets, resolved the same way [`apply`] does.
pub fn target_of(work: &Casework, op: &Op) -> Option<u64> {
    let evidence = all_evidence(work);
    let at = |i: usize| (!evidence.is_empty()).then(|| evidence[i % evidence.len()]);
    match op {
        Op::Verify { evidence }
        | Op::Note { evidence, .. }
        | Op::Extract { evidence, .. }
        | Op::Duplicate { evidence }
        | Op::Tool { evidence, .. } => at(*evidence),
        _ => None,
    }
}

/// Operation expected as the last event of `id` after `op` touched it.
pub fn expected_operation(op: &Op) -> Option<Operation> {
    Some(match op {
        Op::Import { .. } => Operation::Imported,
        Op::Verify { .. } => Operation::Verified,
        Op::Note { .. } => Operation::NoteAdded,
        Op::Extract { .. } => Operation::Extracted,
        Op::Duplicate { .. } => Operation::Duplicated,
        Op::Tool { .. } => Operation::ToolRun,
        _ => return None,
    })
}
