use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ksprim::gf2::{BitVec, Subspace};
use ksprim::goursat::{decompose, reconstruct, tower_decompose};
use ksprim::invariants::{
    closure_search, is_affine, is_linear_block, lp_subspace, primitivity_check,
    resolve_lp_convention, verify_lp_subspace, BlockStatus, ByteConvention, CheckMode,
    ClosureConfig, PermutationOracle, PrimitivityOptions,
};
use ksprim::keyschedule::{
    aes128_expand_key, ks_apply_matrix, translate, KsState, RhoSpec, RoundConstant, AES128_ROUNDS,
};
use ksprim::sbox::SBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{
    ExpandArgs, GlobalOpts, GoursatArgs, LpVerifyArgs, Mode, PrimitivityArgs, RhoKind,
    SboxAuditArgs, SearchArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input.
    Input(String),
    /// Well-formed input that violates a required property.
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Violation(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Violation(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl From<ksprim::Error> for CliError {
    fn from(e: ksprim::Error) -> Self {
        match e {
            ksprim::Error::NotBijective { .. } | ksprim::Error::InvalidGoursat(_) => {
                CliError::Violation(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

type CmdResult = Result<Value, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn hex_rows(s: &Subspace) -> Vec<String> {
    s.basis().iter().map(BitVec::to_hex).collect()
}

pub fn sbox_audit(a: &SboxAuditArgs, _g: &GlobalOpts) -> CmdResult {
    let (sbox, source) = if a.aes {
        (SBox::aes(), "aes".to_string())
    } else {
        let path = a.file.as_ref().expect("clap requires a file without --aes");
        (SBox::from_text(&read(path)?)?, path.display().to_string())
    };
    let profile = sbox.differential_uniformity();
    let histogram = sbox.ddt().ok().map(|d| d.histogram());
    let (normalized, constant) = sbox.normalize_zero();
    let max_order = a.max_order.min(sbox.width().saturating_sub(1));
    let anti = normalized.anti_invariance_order(max_order)?;
    Ok(json!({
        "source": source,
        "width": sbox.width(),
        "differential_uniformity": profile.delta,
        "worst_differential": [profile.worst_direction, profile.worst_output],
        "min_derivative_image": profile.min_image_size,
        "image_bound_holds": profile.image_bound_holds,
        "ddt_histogram": histogram,
        "normalization_constant": constant,
        "anti_invariance": {
            "order": anti.order,
            "scanned_up_to": anti.max_delta,
            "witness_basis": anti.witness.as_ref().map(hex_rows),
            "scans": anti.scanned,
        },
    }))
}

pub fn expand(a: &ExpandArgs, _g: &GlobalOpts) -> CmdResult {
    let key = BitVec::from_hex(128, &a.key)?;
    let keys = aes128_expand_key(&key)?;
    let mut result = json!({
        "key": key.to_hex(),
        "round_keys": keys.iter().map(KsState::word_hex).collect::<Vec<_>>(),
        "round_keys_hex": keys.iter().map(KsState::to_hex).collect::<Vec<_>>(),
    });
    if a.check_model {
        let rho = RhoSpec::aes();
        let mut mismatches = Vec::new();
        for round in 1..=AES128_ROUNDS {
            let prev = &keys[round - 1];
            let rc = RoundConstant::aes(round)?;
            let via_matrix = translate(&ks_apply_matrix(&rho, prev)?, &rc.translation())?;
            // word recurrence: w_i = w_{i-4} + t, t = ρ(w_{i-1}) + rc on the
            // first word, t = w_{i-1} otherwise
            let p = prev.words();
            let mut w = [0u32; 4];
            let mut t = rho.eval(p[3]) ^ rc.widened;
            for j in 0..4 {
                w[j] = p[j] ^ t;
                t = w[j];
            }
            let via_words = KsState::new(32, w)?;
            if via_matrix != keys[round] || via_words != keys[round] {
                mismatches.push(round);
            }
        }
        if !mismatches.is_empty() {
            return Err(CliError::Violation(format!(
                "operator model disagrees with the word recurrence in rounds {mismatches:?}"
            )));
        }
        result["model_agrees"] = json!(true);
    }
    Ok(result)
}

pub fn search(a: &SearchArgs, g: &GlobalOpts) -> CmdResult {
    if a.samples == 0 || a.stable_rounds == 0 {
        return Err(CliError::Input(
            "--samples and --stable-rounds must be positive".into(),
        ));
    }
    let rho = RhoSpec::aes();
    let raw = if a.with_constants {
        let steps = usize::try_from(a.power)
            .ok()
            .filter(|&p| (1..=AES128_ROUNDS).contains(&p))
            .ok_or_else(|| {
                CliError::Input("--with-constants needs a power between 1 and 10".into())
            })?;
        let rcs: Vec<u32> = (1..=steps)
            .map(|i| RoundConstant::aes(i).map(|r| r.widened))
            .collect::<Result<_, _>>()?;
        PermutationOracle::ks_rounds(&rho, &rcs)
    } else {
        PermutationOracle::ks_power(&rho, a.power)
    };
    let f = raw.normalized();
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let lp = lp_subspace(ByteConvention::WordMajor);
    let seeds: Vec<BitVec> = if a.seed_in_lp {
        let mut v = lp.random_element(&mut rng);
        while v.is_zero() {
            v = lp.random_element(&mut rng);
        }
        vec![v]
    } else {
        (0..a.seeds.max(1))
            .map(|_| BitVec::random(128, &mut rng))
            .collect()
    };
    let config = ClosureConfig {
        stable_rounds: a.stable_rounds,
        samples_per_round: a.samples,
        budget_ms: g.budget_ms,
        ..ClosureConfig::default()
    };
    let report = closure_search(&f, &seeds, &config, rng.gen())?;
    let s = &report.subspace;
    let sampled_block = if s.is_proper_nontrivial() {
        let r = is_linear_block(
            &f,
            s,
            CheckMode::Sampled {
                samples: 1000,
                seed: g.seed,
            },
        )?;
        Some(to_value(r.outcome))
    } else {
        None
    };
    let status = if report.reached_full {
        "full_space"
    } else if !report.stabilised {
        "inconclusive"
    } else {
        "proper_subspace"
    };
    Ok(json!({
        "target": f.descriptor(),
        "power": a.power,
        "round_constants": a.with_constants,
        "seeds": seeds.iter().map(BitVec::to_hex).collect::<Vec<_>>(),
        "status": status,
        "dim": s.dim(),
        "inside_lp_subspace": s.is_subspace_of(&lp)?,
        "basis": if s.is_full() { None } else { Some(hex_rows(s)) },
        "sampled_block_check": sampled_block,
        "rounds": report.rounds,
        "evaluations": report.evaluations,
        "stabilised": report.stabilised,
        "search_seed": report.seed,
    }))
}

fn toy_rho(n: usize, kind: RhoKind, rng: &mut ChaCha8Rng) -> Result<RhoSpec, CliError> {
    Ok(match kind {
        RhoKind::Random => RhoSpec::random_non_affine(n, rng)?,
        RhoKind::Affine => RhoSpec::random_affine(n, rng)?,
        RhoKind::Inversion => RhoSpec::table(n, SBox::field_inversion(n)?.table().to_vec())?
            .with_label(format!("inversion(n={n})")),
    })
}

pub fn primitivity(a: &PrimitivityArgs, g: &GlobalOpts) -> CmdResult {
    let start = Instant::now();
    let n = a.toy;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let rho = toy_rho(n, a.rho, &mut rng)?;
    let opts = PrimitivityOptions {
        budget_ms: g.budget_ms,
        sampled: (a.mode == Mode::Sampled).then_some(a.samples),
        seed: Some(g.seed),
        ..Default::default()
    };
    let mut base_gens = PermutationOracle::basis_translations(n);
    base_gens.push(PermutationOracle::rho(&rho));
    let base = primitivity_check(
        &base_gens,
        n,
        &PrimitivityOptions {
            sampled: None,
            ..opts.clone()
        },
    )?;

    let mut lifted_gens = PermutationOracle::basis_translations(4 * n);
    lifted_gens.push(PermutationOracle::ks_power(&rho, 1));
    let lifted = primitivity_check(&lifted_gens, 4 * n, &opts)?;
    if !lifted.witness_verified(&lifted_gens)? {
        return Err(CliError::Violation(
            "imprimitivity witness failed re-verification".into(),
        ));
    }
    let affine = is_affine(&PermutationOracle::rho(&rho), CheckMode::Exhaustive)?;
    let predicted =
        (base.status == BlockStatus::Primitive && !affine.is_affine).then_some("Primitive");
    let consistent = match (predicted, lifted.status) {
        (Some(_), BlockStatus::Primitive) => Some(true),
        (Some(_), BlockStatus::Imprimitive) => Some(false),
        _ => None,
    };
    Ok(json!({
        "n": n,
        "rho": rho.label(),
        "rho_table": (0..1u32 << n).map(|x| rho.eval(x)).collect::<Vec<_>>(),
        "rho_affine": affine.is_affine,
        "base": base,
        "lifted": lifted,
        "predicted_lifted": predicted,
        "consistent_with_prediction": consistent,
        "runtime_ms": start.elapsed().as_millis() as u64,
    }))
}

pub fn goursat(a: &GoursatArgs, _g: &GlobalOpts) -> CmdResult {
    let u = Subspace::from_text(&read(&a.file)?)?;
    match a.split {
        Some(m1) => {
            let m = u.ambient_dim();
            if m1 > m {
                return Err(CliError::Input(format!("split {m1} exceeds dimension {m}")));
            }
            let g = decompose(&u, m1, m - m1)?;
            let round_trip = reconstruct(&g)? == u;
            if !round_trip {
                return Err(CliError::Violation(
                    "reconstruction differs from the input".into(),
                ));
            }
            let mut v = to_value(g.summary());
            v["round_trip"] = json!(round_trip);
            Ok(v)
        }
        None => {
            let tower = tower_decompose(&u)?;
            let report = tower.report(&u)?;
            if !report.round_trip {
                return Err(CliError::Violation(
                    "tower reconstruction differs from the input".into(),
                ));
            }
            Ok(to_value(report))
        }
    }
}

pub fn lp_verify(a: &LpVerifyArgs, g: &GlobalOpts) -> CmdResult {
    let report = verify_lp_subspace(a.samples, g.seed);
    let mut v = to_value(&report);
    if a.resolve {
        let config = ClosureConfig {
            budget_ms: g.budget_ms,
            ..ClosureConfig::default()
        };
        v["closure_resolution"] = to_value(resolve_lp_convention(&config, g.seed)?);
    }
    if let Some(path) = &a.emit_subspace {
        let u = lp_subspace(report.convention.unwrap_or(ByteConvention::WordMajor));
        fs::write(path, u.to_text())
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        v["subspace_file"] = json!(path.display().to_string());
    }
    Ok(v)
}
