//! `cyclecover`: p-rank bounds, ordinarity and degeneration certificates for
//! m-cyclic covers of the projective line.

mod report;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cyclecover::bounds::{bound_b, check_invariants, genus_rh};
use cyclecover::degen::{
    baddeg_diagnostics, certify, enumerate_splits, split_sigma_bound, DegenerationVerdict,
    VerdictKind,
};
use cyclecover::families::{
    family_verdicts, mersenne_family, power_family, search, verify_boundlem, verify_combilem,
    ClassSelection, FamilySpec, SearchDomain,
};
use cyclecover::oracle::{
    sample_instance, CurveInstance, FieldSpec, Oracle, Strategy, DEFAULT_BUDGET,
};
use cyclecover::{CoverType, Error, ErrorKind, PrimeClass, Result};
use report::{emit, join, Format, Outcome};

/// Environment variable consulted for the default budget.
const BUDGET_ENV: &str = "CYCLECOVER_BUDGET";

#[derive(Parser)]
#[command(
    name = "cyclecover",
    version,
    about = "p-rank bounds and degeneration certificates for cyclic covers of the line"
)]
struct Cli {
    /// Print one canonical JSON report
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print a CSV table
    #[arg(long, global = true)]
    csv: bool,
    /// Seed for sampled branch points
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Work budget; falls back to $CYCLECOVER_BUDGET, then 10^7
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Append-only progress file for `search`
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Include wall-clock time; such output is no longer canonical
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TypeArgs {
    /// Degree of the cover
    #[arg(short = 'm')]
    m: u64,
    /// Exponents, comma separated
    #[arg(short = 'a', value_delimiter = ',', required = true)]
    a: Vec<u64>,
}

impl TypeArgs {
    fn cover_type(&self) -> Result<CoverType> {
        CoverType::new(self.m, self.a.clone())
    }
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ClassArgs {
    /// Residue class of the characteristic mod m
    #[arg(short = 'c')]
    c: Option<u64>,
    /// A prime; its class mod m is used
    #[arg(short = 'p')]
    p: Option<u64>,
}

impl ClassArgs {
    fn class(&self, m: u64) -> Result<PrimeClass> {
        match (self.c, self.p) {
            (Some(c), _) => PrimeClass::new(m, c),
            (None, Some(p)) => PrimeClass::from_prime(p, m),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[command(flatten)]
    ty: TypeArgs,
    /// Characteristic
    #[arg(short = 'p')]
    p: u64,
    /// Field degree: Q = p^e
    #[arg(short = 'e', default_value_t = 1)]
    e: u32,
    /// Branch points in the digit encoding of F_Q; sampled from --seed if absent
    #[arg(long, value_delimiter = ',')]
    points: Vec<u64>,
    /// auto, count or cartier
    #[arg(long, default_value = "auto")]
    strategy: Strategy,
}

#[derive(Subcommand)]
enum Command {
    /// The p-rank bound B and its per-orbit terms
    Bound {
        #[command(flatten)]
        ty: TypeArgs,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Generic ordinarity for a class
    Ordinary {
        #[command(flatten)]
        ty: TypeArgs,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Genus by Riemann-Hurwitz
    Genus {
        #[command(flatten)]
        ty: TypeArgs,
    },
    /// Two-component degenerations and their child types
    Splits {
        #[command(flatten)]
        ty: TypeArgs,
        /// Also bound the p-rank of each special fiber for this class
        #[arg(short = 'c')]
        c: Option<u64>,
    },
    /// Decide whether a good degeneration can exist
    Certify {
        #[command(flatten)]
        ty: TypeArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// Required p-rank (default: B)
        #[arg(long)]
        b: Option<u64>,
    },
    /// Certify a one-parameter family for all classes of a given order
    Family {
        #[command(subcommand)]
        which: FamilyCmd,
    },
    /// Exhaustive checks of the combinatorial identities
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Enumerate canonical types with no good degeneration
    Search(SearchArgs),
    /// p-rank of an explicit curve
    Prank(InstanceArgs),
    /// p-rank of an explicit curve against the bound B
    Compare(InstanceArgs),
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// m = 2^f - 1 with exponents 2^i
    Mersenne {
        #[arg(short = 'f')]
        f: u64,
        /// Class order (default: f)
        #[arg(long)]
        order: Option<u64>,
    },
    /// Exponents alpha^i mod m
    Power {
        #[arg(short = 'm')]
        m: u64,
        #[arg(long)]
        alpha: u64,
        /// Class order (default: order of alpha)
        #[arg(long)]
        order: Option<u64>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// gamma(s) = |S| and gamma(m - s) = f - |S| for all subsets S
    Combilem {
        #[arg(short = 'f')]
        f: u64,
    },
    /// Ordinarity of the Mersenne member for classes 2^i of order f
    Boundlem {
        #[arg(short = 'f')]
        f: u64,
        /// One class; default all powers of 2 of order f
        #[arg(short = 'c')]
        c: Option<u64>,
    },
    /// Spectral identities over all small types
    Invariants {
        #[arg(long, default_value_t = 12)]
        m_max: u64,
        #[arg(long, default_value_t = 5)]
        r_max: usize,
    },
    /// Nonordinarity bookkeeping for one side S1 of a Mersenne split
    Baddeg {
        #[arg(short = 'f')]
        f: u64,
        /// 0-based exponent indices on the first component
        #[arg(long, value_delimiter = ',', required = true)]
        s1: Vec<u32>,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Single degree (sets both bounds)
    #[arg(short = 'm')]
    m: Option<u64>,
    #[arg(long)]
    m_min: Option<u64>,
    #[arg(long)]
    m_max: Option<u64>,
    /// Single number of branch points (sets both bounds)
    #[arg(short = 'r')]
    r: Option<usize>,
    #[arg(long)]
    r_min: Option<usize>,
    #[arg(long)]
    r_max: Option<usize>,
    /// Classes, comma separated; default all units
    #[arg(short = 'c', value_delimiter = ',')]
    c: Vec<u64>,
    /// Only classes of this order
    #[arg(long, conflicts_with = "c")]
    order: Option<u64>,
    /// Drop types with a pair of exponents summing to m
    #[arg(long)]
    skip_pair_condition: bool,
}

impl SearchArgs {
    fn domain(&self) -> Result<SearchDomain> {
        let need = |v: Option<u64>, name: &str| {
            v.ok_or_else(|| Error::BadInstance(format!("missing {name}")))
        };
        let m_min = need(self.m_min.or(self.m), "-m or --m-min")?;
        let m_max = need(self.m_max.or(self.m), "-m or --m-max")?;
        let r_min = need(self.r_min.or(self.r).map(|r| r as u64), "-r or --r-min")? as usize;
        let r_max = need(self.r_max.or(self.r).map(|r| r as u64), "-r or --r-max")? as usize;
        if m_min > m_max || r_min > r_max {
            return Err(Error::BadInstance("empty search range".into()));
        }
        let classes = match (&self.order, self.c.is_empty()) {
            (Some(f), _) => ClassSelection::Order(*f),
            (None, false) => ClassSelection::Residues(self.c.clone()),
            (None, true) => ClassSelection::All,
        };
        Ok(SearchDomain {
            m_min,
            m_max,
            r_min,
            r_max,
            classes,
            skip_pair_condition: self.skip_pair_condition,
        })
    }
}

fn verdict_label(v: &DegenerationVerdict) -> String {
    match &v.kind {
        VerdictKind::CertifiedNoGoodDegeneration => "CertifiedNo".into(),
        VerdictKind::WitnessCandidate { split } => {
            format!(
                "WitnessCandidate(S1 = {{{}}})",
                join(&v.splits[*split].split.s1, ",")
            )
        }
        VerdictKind::Inconclusive { reason } => format!("Inconclusive({reason})"),
    }
}

fn class_inputs(ty: &TypeArgs, class: &ClassArgs) -> serde_json::Value {
    json!({"m": ty.m, "a": ty.a, "c": class.c, "p": class.p})
}

fn cmd_bound(ty: &TypeArgs, class: &ClassArgs) -> Result<Outcome> {
    let t = ty.cover_type()?;
    let cl = class.class(t.m())?;
    let rep = bound_b(&t, &cl)?;
    let mut text = format!("{t} at c = {} (order {})\n", cl.c(), cl.order());
    for o in &rep.per_orbit {
        let _ = writeln!(
            text,
            "  orbit of {:>4}  size {:>3}  min dim {}",
            o.representative, o.size, o.min_dim
        );
    }
    let _ = writeln!(
        text,
        "B = {}, genus = {}, {}",
        rep.b,
        rep.genus,
        if rep.ordinary {
            "ordinary"
        } else {
            "not ordinary"
        }
    );
    let rows = rep
        .per_orbit
        .iter()
        .map(|o| {
            vec![
                t.to_string(),
                cl.c().to_string(),
                o.representative.to_string(),
                o.size.to_string(),
                o.min_dim.to_string(),
                rep.b.to_string(),
                rep.genus.to_string(),
                rep.ordinary.to_string(),
            ]
        })
        .collect();
    Ok(Outcome::new("bound", class_inputs(ty, class), &rep)
        .text(text)
        .table(
            vec![
                "type", "c", "orbit", "size", "min_dim", "B", "genus", "ordinary",
            ],
            rows,
        ))
}

fn cmd_ordinary(ty: &TypeArgs, class: &ClassArgs) -> Result<Outcome> {
    let t = ty.cover_type()?;
    let cl = class.class(t.m())?;
    let rep = bound_b(&t, &cl)?;
    let out = json!({"ordinary": rep.ordinary, "B": rep.b, "genus": rep.genus});
    let row = vec![
        t.to_string(),
        cl.c().to_string(),
        rep.ordinary.to_string(),
        rep.b.to_string(),
        rep.genus.to_string(),
    ];
    Ok(Outcome::new("ordinary", class_inputs(ty, class), out)
        .text(format!(
            "{t} at c = {}: {}\n",
            cl.c(),
            if rep.ordinary {
                "ordinary"
            } else {
                "not ordinary"
            }
        ))
        .table(vec!["type", "c", "ordinary", "B", "genus"], vec![row]))
}

fn cmd_genus(ty: &TypeArgs) -> Result<Outcome> {
    let t = ty.cover_type()?;
    let g = genus_rh(&t)?;
    Ok(
        Outcome::new("genus", json!({"m": ty.m, "a": ty.a}), json!({"genus": g}))
            .text(format!("{t}: genus {g}\n"))
            .table(
                vec!["type", "genus"],
                vec![vec![t.to_string(), g.to_string()]],
            ),
    )
}

fn cmd_splits(ty: &TypeArgs, c: Option<u64>) -> Result<Outcome> {
    let t = ty.cover_type()?;
    let class = c.map(|c| PrimeClass::new(t.m(), c)).transpose()?;
    let splits = enumerate_splits(&t)?;
    let mut entries = Vec::new();
    let mut text = String::new();
    let mut rows = Vec::new();
    for s in &splits {
        let bound = class
            .as_ref()
            .map(|cl| split_sigma_bound(s, cl))
            .transpose()?;
        let child = |c: &cyclecover::degen::ChildType| {
            let mut label = format!("({};{})", c.m, join(&c.exponents, ","));
            if c.components > 1 {
                let _ = write!(label, " x{}", c.components);
            }
            label
        };
        let _ = write!(
            text,
            "S1 = {{{}}}  {}  |  {}  nodes {}",
            join(&s.s1, ","),
            child(&s.child1),
            child(&s.child2),
            s.node_count
        );
        if let Some(b) = &bound {
            let _ = write!(
                text,
                "  bound {}{}",
                b.bound,
                if b.flagged { " (flagged)" } else { "" }
            );
        }
        text.push('\n');
        rows.push(vec![
            join(&s.s1, " "),
            join(&s.s2, " "),
            child(&s.child1),
            child(&s.child2),
            s.node_count.to_string(),
            bound
                .as_ref()
                .map_or(String::new(), |b| b.bound.to_string()),
        ]);
        entries.push(json!({"split": s, "bound": bound}));
    }
    if splits.is_empty() {
        text.push_str("no two-component degenerations\n");
    }
    Ok(
        Outcome::new("splits", json!({"m": ty.m, "a": ty.a, "c": c}), entries)
            .text(text)
            .table(
                vec!["s1", "s2", "child1", "child2", "node_count", "bound"],
                rows,
            ),
    )
}

fn cmd_certify(ty: &TypeArgs, class: &ClassArgs, b: Option<u64>) -> Result<Outcome> {
    let t = ty.cover_type()?;
    let cl = class.class(t.m())?;
    let v = certify(&t, &cl, b)?;
    let mut text = format!("{t} at c = {}, required p-rank {}\n", cl.c(), v.b);
    let mut rows = Vec::new();
    for e in &v.splits {
        let _ = writeln!(
            text,
            "  S1 = {{{}}}: {} + {} + {} = {}{}",
            join(&e.split.s1, ","),
            e.bound.child1_bound,
            e.bound.child2_bound,
            e.bound.toric_rank,
            e.bound.bound,
            if e.bound.flagged { " (flagged)" } else { "" }
        );
        rows.push(vec![
            t.to_string(),
            cl.c().to_string(),
            v.b.to_string(),
            join(&e.split.s1, " "),
            e.bound.child1_bound.to_string(),
            e.bound.child2_bound.to_string(),
            e.bound.toric_rank.to_string(),
            e.bound.bound.to_string(),
            e.bound.flagged.to_string(),
            verdict_label(&v),
        ]);
    }
    let _ = writeln!(text, "verdict: {}", verdict_label(&v));
    let mut inputs = class_inputs(ty, class);
    inputs["b"] = json!(b);
    Ok(Outcome::new("certify", inputs, &v).text(text).table(
        vec![
            "type",
            "c",
            "b",
            "s1",
            "child1_bound",
            "child2_bound",
            "toric_rank",
            "bound",
            "flagged",
            "verdict",
        ],
        rows,
    ))
}

fn cmd_family(which: &FamilyCmd) -> Result<Outcome> {
    let (fam, order, inputs): (FamilySpec, Option<u64>, _) = match which {
        FamilyCmd::Mersenne { f, order } => (
            mersenne_family(*f)?,
            *order,
            json!({"family": "mersenne", "f": f, "order": order}),
        ),
        FamilyCmd::Power { m, alpha, order } => (
            power_family(*m, *alpha)?,
            *order,
            json!({"family": "power", "m": m, "alpha": alpha, "order": order}),
        ),
    };
    let verdicts = family_verdicts(&fam, order)?;
    let t = fam.cover_type();
    let mut text = format!("{t}, alpha = {}, n = {}\n", fam.alpha(), fam.n());
    let mut rows = Vec::new();
    for v in &verdicts {
        let _ = writeln!(
            text,
            "  c = {} (order {}): B = {}, genus = {}, {}",
            v.c,
            v.order,
            v.b,
            v.genus,
            verdict_label(&v.verdict)
        );
        rows.push(vec![
            t.to_string(),
            v.c.to_string(),
            v.order.to_string(),
            v.b.to_string(),
            v.genus.to_string(),
            verdict_label(&v.verdict),
        ]);
    }
    if verdicts.is_empty() {
        text.push_str("  no classes of that order\n");
    }
    Ok(Outcome::new(
        "family",
        inputs,
        json!({"family": fam, "verdicts": verdicts}),
    )
    .text(text)
    .table(vec!["type", "c", "order", "B", "genus", "verdict"], rows))
}

fn cmd_verify(which: &VerifyCmd) -> Result<Outcome> {
    match which {
        VerifyCmd::Combilem { f } => {
            let rep = verify_combilem(*f)?;
            let ok = rep.passed == rep.checked;
            let row = vec![
                rep.f.to_string(),
                rep.m.to_string(),
                rep.checked.to_string(),
                rep.passed.to_string(),
            ];
            let mut out = Outcome::new("verify combilem", json!({"f": f}), &rep)
                .text(format!(
                    "f = {}: {}/{} subsets pass\n",
                    rep.f, rep.passed, rep.checked
                ))
                .table(vec!["f", "m", "checked", "passed"], vec![row]);
            if !ok {
                eprintln!("subset identity fails for masks {:?}", rep.failures);
                out.exit = 3;
            }
            Ok(out)
        }
        VerifyCmd::Boundlem { f, c } => {
            let classes: Vec<u64> = match c {
                Some(c) => vec![*c],
                None => mersenne_family(*f)?
                    .full_order_classes()
                    .iter()
                    .map(PrimeClass::c)
                    .collect(),
            };
            let reps = classes
                .iter()
                .map(|&c| verify_boundlem(*f, c))
                .collect::<Result<Vec<_>>>()?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for r in &reps {
                let _ = writeln!(
                    text,
                    "f = {}, c = {}: B = {}, genus = {} (closed form gives {}), {}",
                    r.f,
                    r.c,
                    r.b,
                    r.genus,
                    r.closed_form_genus,
                    if r.ordinary {
                        "ordinary"
                    } else {
                        "not ordinary"
                    }
                );
                rows.push(vec![
                    r.f.to_string(),
                    r.c.to_string(),
                    r.b.to_string(),
                    r.genus.to_string(),
                    r.closed_form_genus.to_string(),
                    r.ordinary.to_string(),
                ]);
            }
            Ok(
                Outcome::new("verify boundlem", json!({"f": f, "c": c}), &reps)
                    .text(text)
                    .table(
                        vec!["f", "c", "B", "genus", "closed_form_genus", "ordinary"],
                        rows,
                    ),
            )
        }
        VerifyCmd::Invariants { m_max, r_max } => {
            let rep = check_invariants(*m_max, *r_max)?;
            let row = vec![
                rep.m_max.to_string(),
                rep.r_max.to_string(),
                rep.types.to_string(),
                rep.classes.to_string(),
            ];
            Ok(Outcome::new(
                "verify invariants",
                json!({"m_max": m_max, "r_max": r_max}),
                &rep,
            )
            .text(format!(
                "checked {} types ({} type-class pairs) with m <= {}, r <= {}\n",
                rep.types, rep.classes, rep.m_max, rep.r_max
            ))
            .table(vec!["m_max", "r_max", "types", "classes"], vec![row]))
        }
        VerifyCmd::Baddeg { f, s1 } => {
            let d = baddeg_diagnostics(&mersenne_family(*f)?, s1)?;
            let text = format!(
                "S1 = {{{}}}: s = {}, d_s = {}, sum of gamma_1 = {} = {} (mod {f}); \
                 |S1|(|S1|-1) = {} (mod {f}), congruence {}\n",
                join(&d.s1, ","),
                d.s,
                d.d_s,
                d.sum,
                d.sum_mod_f,
                d.claimed_residue,
                if d.claimed_congruence_holds {
                    "holds"
                } else {
                    "fails"
                }
            );
            let row = vec![
                f.to_string(),
                join(&d.s1, " "),
                d.s.to_string(),
                d.d_s.to_string(),
                d.sum.to_string(),
                d.sum_mod_f.to_string(),
                d.claimed_residue.to_string(),
                d.claimed_congruence_holds.to_string(),
            ];
            Ok(Outcome::new("verify baddeg", json!({"f": f, "s1": s1}), &d)
                .text(text)
                .table(
                    vec![
                        "f",
                        "s1",
                        "s",
                        "d_s",
                        "sum",
                        "sum_mod_f",
                        "claimed_residue",
                        "claimed_congruence_holds",
                    ],
                    vec![row],
                ))
        }
    }
}

fn cmd_search(args: &SearchArgs, cli: &Cli, budget: u64) -> Result<Outcome> {
    let domain = args.domain()?;
    let hits = search(&domain, budget, cli.checkpoint.as_deref())?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for h in &hits {
        let _ = writeln!(
            text,
            "{} c = {}: {}",
            h.ty,
            h.class.c(),
            verdict_label(&h.verdict)
        );
        rows.push(vec![
            h.ty.to_string(),
            h.class.c().to_string(),
            h.verdict.b.to_string(),
            verdict_label(&h.verdict),
        ]);
    }
    let _ = writeln!(text, "{} hits", hits.len());
    let inputs = serde_json::to_value(&domain).expect("domain serializes");
    Ok(Outcome::new("search", inputs, json!({"hits": hits}))
        .text(text)
        .table(vec!["type", "c", "B", "verdict"], rows))
}

fn instance(args: &InstanceArgs, seed: u64) -> Result<(CurveInstance, Option<u64>)> {
    let ty = args.ty.cover_type()?;
    let field = FieldSpec::new(args.p, args.e)?;
    if args.points.is_empty() {
        Ok((sample_instance(&ty, field, seed)?, Some(seed)))
    } else {
        Ok((CurveInstance::new(ty, field, args.points.clone())?, None))
    }
}

fn instance_inputs(args: &InstanceArgs, inst: &CurveInstance) -> serde_json::Value {
    json!({
        "m": args.ty.m,
        "a": args.ty.a,
        "p": args.p,
        "e": args.e,
        "points": inst.points,
        "strategy": args.strategy,
    })
}

fn cmd_prank(args: &InstanceArgs, seed: u64, oracle: &Oracle) -> Result<Outcome> {
    let (inst, used_seed) = instance(args, seed)?;
    let r = oracle.p_rank(&inst, args.strategy)?;
    let text = format!(
        "{} over F_{}^{} at points {}: p-rank {} of genus {} ({:?})\n",
        inst.ty,
        args.p,
        args.e,
        join(&inst.points, ","),
        r.sigma,
        r.genus,
        r.strategy
    );
    let row = vec![
        inst.ty.to_string(),
        args.p.to_string(),
        args.e.to_string(),
        join(&inst.points, " "),
        r.sigma.to_string(),
        r.genus.to_string(),
    ];
    let mut out = Outcome::new("prank", instance_inputs(args, &inst), &r)
        .text(text)
        .table(
            vec!["type", "p", "e", "points", "sigma", "genus"],
            vec![row],
        );
    out.seed = used_seed;
    Ok(out)
}

fn cmd_compare(args: &InstanceArgs, seed: u64, oracle: &Oracle) -> Result<Outcome> {
    let (inst, used_seed) = instance(args, seed)?;
    let cmp = oracle.compare_bound(&inst, args.strategy)?;
    let verdict = match (cmp.consistent, cmp.attains) {
        (true, true) => "attains B",
        (true, false) => "below B",
        (false, _) => "EXCEEDS B",
    };
    let text = format!(
        "{} over F_{}^{}, c = {}: sigma = {}, B = {}, genus = {}: {verdict}\n",
        inst.ty, args.p, args.e, cmp.c, cmp.sigma, cmp.bound, cmp.genus
    );
    let row = vec![
        inst.ty.to_string(),
        args.p.to_string(),
        args.e.to_string(),
        join(&inst.points, " "),
        cmp.sigma.to_string(),
        cmp.bound.to_string(),
        cmp.genus.to_string(),
        cmp.consistent.to_string(),
        cmp.attains.to_string(),
    ];
    let mut out = Outcome::new("compare", instance_inputs(args, &inst), &cmp)
        .text(text)
        .table(
            vec![
                "type",
                "p",
                "e",
                "points",
                "sigma",
                "B",
                "genus",
                "consistent",
                "attains",
            ],
            vec![row],
        );
    out.seed = used_seed;
    if !cmp.consistent {
        if cmp.large_characteristic {
            eprintln!(
                "!!! p-rank {} exceeds the bound B = {} at p = {} >= m(r-3) !!!",
                cmp.sigma, cmp.bound, args.p
            );
            out.exit = 3;
        } else {
            eprintln!(
                "finding: p-rank {} exceeds B = {} at small characteristic p = {} < m(r-3)",
                cmp.sigma, cmp.bound, args.p
            );
        }
    }
    Ok(out)
}

fn resolve_budget(flag: Option<u64>) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::BadInstance(format!("{BUDGET_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let budget = resolve_budget(cli.budget)?;
    let oracle = Oracle::new(budget);
    match &cli.command {
        Command::Bound { ty, class } => cmd_bound(ty, class),
        Command::Ordinary { ty, class } => cmd_ordinary(ty, class),
        Command::Genus { ty } => cmd_genus(ty),
        Command::Splits { ty, c } => cmd_splits(ty, *c),
        Command::Certify { ty, class, b } => cmd_certify(ty, class, *b),
        Command::Family { which } => cmd_family(which),
        Command::Verify { which } => cmd_verify(which),
        Command::Search(args) => cmd_search(args, cli, budget),
        Command::Prank(args) => cmd_prank(args, cli.seed, &oracle),
        Command::Compare(args) => cmd_compare(args, cli.seed, &oracle),
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 1,
        ErrorKind::Budget => 2,
        ErrorKind::Invariant => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let format = match (cli.json, cli.csv) {
        (true, _) => Format::Json,
        (_, true) => Format::Csv,
        _ => Format::Text,
    };
    let start = Instant::now();
    match run(&cli) {
        Ok(outcome) => {
            let timing = cli.timing.then(|| start.elapsed().as_millis());
            if let Err(e) = emit(&mut std::io::stdout().lock(), &outcome, format, timing) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            if e.kind() == ErrorKind::Invariant {
                eprintln!("!!! {e}");
                eprintln!("!!! this is a bug or a counterexample; please keep the command line");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
