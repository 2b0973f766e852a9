//! Command-line front end. Every map-defining number is an exact rational
//! written `p/q` or as an integer; floats are refused.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::cubes::{self, CubeBlock, CubeMap, CubeRule};
use crate::error::{Error, Result};
use crate::estimators::{self, BowenContext, CoverStrategy, DimEstimate, DimensionStage};
use crate::maps1d::{make_schedule_map, make_tent_g, PAMap, Schedule};
use crate::rational::{self, format_rational, int, parse_rational, Rational};
use crate::surgery;
use crate::symbolic::{self, LimitMode};

/// A rational field in a spec file: a `"p/q"` string or a JSON integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Q;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a rational \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
                Ok(Q(int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Q, E> {
                Err(E::custom(format!(
                    "float {v} refused: write map parameters as \"p/q\""
                )))
            }
        }
        d.deserialize_any(V)
    }
}

/// A map recipe, as read from a spec file and stored in map artifacts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Construction {
    PhiSr {
        s: u32,
        r: Q,
        #[serde(rename = "K")]
        k: usize,
    },
    Quadratic {
        s: u32,
        #[serde(rename = "K")]
        k: usize,
    },
    OddLegs {
        s: u32,
        #[serde(rename = "K")]
        k: usize,
    },
    /// `[width, legs]` pairs laid left to right from 0.
    Explicit {
        blocks: Vec<(Q, u64)>,
    },
    TentG,
    Identity,
    Splice {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Box<Construction>>,
        p: Q,
        a: Q,
        eps: Q,
        #[serde(default = "default_splice_blocks")]
        blocks: usize,
    },
    Cube {
        m: usize,
        /// `"power"` or `"quadratic"`.
        rule: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<Q>,
        #[serde(rename = "B")]
        b: Q,
        #[serde(rename = "K")]
        k: usize,
    },
}

fn default_splice_blocks() -> usize {
    4
}

/// What a construction produces.
#[derive(Clone, Debug)]
pub enum Built {
    Interval {
        map: PAMap,
        schedule: Option<Schedule>,
    },
    Cube(CubeMap),
}

impl Construction {
    pub fn schedule(&self) -> Result<Option<Schedule>> {
        Ok(Some(match self {
            Construction::PhiSr { s, r, k } => Schedule::power_law(*s, r.0.clone(), *k)?,
            Construction::Quadratic { s, k } => Schedule::quadratic(*s, *k)?,
            Construction::OddLegs { s, k } => Schedule::odd_legs(*s, *k)?,
            Construction::Explicit { blocks } => {
                Schedule::explicit(blocks.iter().map(|(w, l)| (w.0.clone(), *l)).collect())?
            }
            Construction::TentG => Schedule::explicit(vec![(Rational::one(), 3)])?,
            _ => return Ok(None),
        }))
    }

    fn cube_rule(rule: &str, r: &Option<Q>) -> Result<CubeRule> {
        match (rule, r) {
            ("power", Some(r)) => Ok(CubeRule::PowerLaw { r: r.0.clone() }),
            ("power", None) => Err(Error::invalid("rule \"power\" needs r")),
            ("quadratic", _) => Ok(CubeRule::Quadratic),
            (other, _) => Err(Error::invalid(format!(
                "unknown cube rule {other:?} (expected \"power\" or \"quadratic\")"
            ))),
        }
    }

    pub fn build(&self) -> Result<Built> {
        let budget = rational::default_budget();
        match self {
            Construction::TentG => Ok(Built::Interval {
                map: make_tent_g(),
                schedule: self.schedule()?,
            }),
            Construction::Identity => Ok(Built::Interval {
                map: PAMap::identity(Rational::zero(), Rational::one())?,
                schedule: None,
            }),
            Construction::Splice {
                base,
                p,
                a,
                eps,
                blocks,
            } => {
                let phi0 = base_map(base)?;
                let sp = surgery::splice(&phi0, &p.0, &a.0, &eps.0, *blocks)?;
                Ok(Built::Interval {
                    map: sp.map,
                    schedule: None,
                })
            }
            Construction::Cube { m, rule, r, b, k } => {
                let rule = Self::cube_rule(rule, r)?;
                Ok(Built::Cube(cubes::make_nested_cube_map(
                    *m,
                    rule,
                    b.0.clone(),
                    *k,
                )?))
            }
            _ => {
                let schedule = self.schedule()?.expect("schedule constructions");
                let map = make_schedule_map(&schedule, budget)?;
                Ok(Built::Interval {
                    map,
                    schedule: Some(schedule),
                })
            }
        }
    }
}

fn base_map(base: &Option<Box<Construction>>) -> Result<PAMap> {
    match base {
        None => PAMap::identity(Rational::zero(), Rational::one()),
        Some(c) => match c.build()? {
            Built::Interval { map, .. } => Ok(map),
            Built::Cube(_) => Err(Error::invalid("splice needs an interval map as base")),
        },
    }
}

/// A built map on disk: the recipe, a one-line summary and the map itself.
#[derive(Debug, Serialize, Deserialize)]
pub struct Artifact {
    pub construction: Construction,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<serde_json::Value>,
}

impl Artifact {
    pub fn from_construction(construction: Construction) -> Result<(Self, Built)> {
        let built = construction.build()?;
        let (summary, map, cube) = match &built {
            Built::Interval { map, schedule } => {
                let sched = schedule
                    .as_ref()
                    .map(Schedule::describe)
                    .unwrap_or_else(|| "no schedule".into());
                (
                    format!("{} nodes; {}", map.node_count(), sched),
                    Some(serde_json::from_str(&map.to_json()?)?),
                    None,
                )
            }
            Built::Cube(c) => (
                format!(
                    "m={}; {} blocks; {}",
                    c.m,
                    c.blocks.len(),
                    c.rule.describe()
                ),
                None,
                Some(serde_json::from_str(&c.to_json()?)?),
            ),
        };
        Ok((
            Self {
                construction,
                summary,
                map,
                cube,
            },
            built,
        ))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// The stored interval map, validated.
    pub fn interval_map(&self) -> Result<PAMap> {
        let v = self
            .map
            .as_ref()
            .ok_or_else(|| Error::invalid("artifact holds no interval map"))?;
        PAMap::from_json(&v.to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "meandim",
    version,
    about = "Horseshoe maps and mean-dimension estimates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mdim {
    #[value(name = "H")]
    H,
    #[value(name = "M")]
    M,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a map from a JSON spec file.
    Build {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Finite-stage estimate of mean Hausdorff (H) or metric mean (M) dimension.
    Estimate {
        map: PathBuf,
        #[arg(long, value_enum)]
        mdim: Mdim,
        /// Largest block index used.
        #[arg(long)]
        k_max: Option<usize>,
        /// Stages n = 1..=n_max.
        #[arg(long, default_value_t = 1)]
        n_max: usize,
        /// Comma-separated scales for M (default: the blocks' ε_k).
        #[arg(long)]
        eps: Option<String>,
        /// H from the closed-form stage formula instead of covers.
        #[arg(long)]
        symbolic: bool,
        /// CSV path; a JSON summary is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form limit of a family: power_law S R | quadratic S | odd_legs S
    /// | cube M R | cube_quadratic M | explicit W:L ...
    Predict { family: String, params: Vec<String> },
    /// Re-derive a map artifact and run its invariant checks.
    Verify { map: PathBuf },
    /// Splice a horseshoe schedule of dimension A at a fixed point.
    Splice {
        /// Base map artifact (default: the identity on [0, 1]).
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        p: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Strong-horseshoe detector.
    Detect {
        map: PathBuf,
        /// Interval `a,b` (interval maps).
        #[arg(long)]
        j: Option<String>,
        /// Leg cut points `x0,x1,...,xk` (interval maps).
        #[arg(long)]
        legs: Option<String>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        k: Option<usize>,
        /// Block index (cube maps).
        #[arg(long)]
        block: Option<usize>,
    },
    /// Stage table for nested cube horseshoes.
    Cube {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        quadratic: bool,
        #[arg(long, default_value = "1")]
        b: String,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Compute each stage from enumerated cylinders (small k only).
        #[arg(long)]
        enumerate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::invalid(e.to_string()))?;
    run(cli, out)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Build { spec, out: path } => {
            let line = cmd_build(&spec, &path)?;
            writeln!(out, "{line}")?;
            Ok(0)
        }
        Command::Estimate {
            map,
            mdim,
            k_max,
            n_max,
            eps,
            symbolic,
            out: path,
        } => {
            let scales = eps.as_deref().map(parse_list).transpose()?;
            let opts = EstimateOptions {
                mdim,
                k_max,
                n_max,
                scales,
                symbolic,
            };
            let run = cmd_estimate(&map, &opts)?;
            match &path {
                Some(p) => {
                    fs::write(p, &run.csv)?;
                    fs::write(p.with_extension("json"), &run.json)?;
                }
                None => out.write_all(run.csv.as_bytes())?,
            }
            if let Some(why) = &run.truncated {
                eprintln!("estimate truncated: {why}");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Predict { family, params } => {
            let line = cmd_predict(&family, &params)?;
            writeln!(out, "{line}")?;
            Ok(0)
        }
        Command::Verify { map } => {
            let report = cmd_verify(&map)?;
            out.write_all(report.text.as_bytes())?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Splice {
            map,
            p,
            a,
            eps,
            blocks,
            out: path,
        } => {
            let text = cmd_splice(map.as_deref(), &p, &a, &eps, blocks, path.as_deref())?;
            out.write_all(text.as_bytes())?;
            Ok(0)
        }
        Command::Detect {
            map,
            j,
            legs,
            eps,
            k,
            block,
        } => {
            let text = cmd_detect(&map, j.as_deref(), legs.as_deref(), &eps, k, block)?;
            out.write_all(text.as_bytes())?;
            Ok(0)
        }
        Command::Cube {
            m,
            r,
            quadratic,
            b,
            k_max,
            n,
            enumerate,
            out: path,
        } => {
            let rule = match (quadratic, r) {
                (true, _) => CubeRule::Quadratic,
                (false, Some(r)) => CubeRule::PowerLaw {
                    r: parse_rational(&r)?,
                },
                (false, None) => return Err(Error::invalid("give --r or --quadratic")),
            };
            let est = cmd_cube(m, &rule, &parse_rational(&b)?, k_max, n, enumerate)?;
            match &path {
                Some(p) => {
                    fs::write(p, est.to_csv())?;
                    fs::write(p.with_extension("json"), est.to_json()? + "\n")?;
                }
                None => out.write_all(est.to_csv().as_bytes())?,
            }
            Ok(0)
        }
    }
}

fn parse_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(|t| parse_rational(t.trim())).collect()
}

/// Builds the spec in `spec` and writes the artifact to `out`. Returns the
/// echo line.
pub fn cmd_build(spec: &Path, out: &Path) -> Result<String> {
    let text = fs::read_to_string(spec)?;
    let construction: Construction = serde_json::from_str(&text)?;
    let (artifact, _) = Artifact::from_construction(construction)?;
    fs::write(out, artifact.to_json()?)?;
    Ok(format!("wrote {}: {}", out.display(), artifact.summary))
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub mdim: Mdim,
    pub k_max: Option<usize>,
    pub n_max: usize,
    pub scales: Option<Vec<Rational>>,
    pub symbolic: bool,
}

/// CSV, JSON summary and, when the budget ran out, the reason.
#[derive(Clone, Debug)]
pub struct EstimateRun {
    pub csv: String,
    pub json: String,
    pub truncated: Option<String>,
}

pub fn cmd_estimate(path: &Path, opts: &EstimateOptions) -> Result<EstimateRun> {
    let artifact = Artifact::read(path)?;
    let map = artifact.interval_map()?;
    let schedule = artifact.construction.schedule()?;
    let budget = rational::default_budget();
    if opts.n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let ks: Vec<usize> = match &schedule {
        Some(s) => s
            .indices()
            .filter(|&k| opts.k_max.is_none_or(|m| k <= m))
            .collect(),
        None => vec![],
    };

    let mut stages: Vec<DimensionStage> = Vec::new();
    let mut truncated = None;
    match opts.mdim {
        Mdim::H => {
            let schedule = schedule
                .as_ref()
                .ok_or_else(|| Error::invalid("H estimates need a map built from a schedule"))?;
            for &k in &ks {
                for n in 1..=opts.n_max {
                    let step = if opts.symbolic {
                        estimators::mdim_h_symbolic(schedule, &[(k, n)])
                    } else {
                        estimators::mdim_h_estimate(&map, schedule, &[(k, n)], budget)
                    };
                    match step {
                        Ok(e) => stages.extend(e.stages),
                        Err(e @ Error::Budget { .. }) => {
                            truncated = Some(e.to_string());
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if truncated.is_some() {
                    break;
                }
            }
        }
        Mdim::M => {
            let scales = match &opts.scales {
                Some(s) => s.clone(),
                None => {
                    let schedule = schedule.as_ref().ok_or_else(|| {
                        Error::invalid("M estimates on maps without a schedule need --eps")
                    })?;
                    ks.iter()
                        .map(|&k| schedule.block(k).map(|b| b.leg_width()))
                        .collect::<Result<_>>()?
                }
            };
            for (i, eps) in scales.iter().enumerate() {
                match estimators::mdim_m_estimate(
                    &map,
                    std::slice::from_ref(eps),
                    opts.n_max,
                    budget,
                ) {
                    Ok(e) => stages.extend(e.stages.into_iter().map(|mut s| {
                        s.k = i + 1;
                        s
                    })),
                    Err(e @ Error::Budget { .. }) => {
                        truncated = Some(e.to_string());
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let (mut csv, json) = if stages.is_empty() {
        (
            String::from("k,n,eps,dim,normalized\n"),
            String::from("{\"lower\": null, \"upper\": null, \"stages\": []}\n"),
        )
    } else {
        let est = DimEstimate::from_stages(stages)?;
        (est.to_csv(), est.to_json()? + "\n")
    };
    if let Some(why) = &truncated {
        let _ = writeln!(csv, "# truncated: {why}");
    }
    Ok(EstimateRun {
        csv,
        json,
        truncated,
    })
}

/// `exact=<p/q> value=<float>` for the analytic families; explicit schedules
/// report their limsup and liminf.
pub fn cmd_predict(family: &str, params: &[String]) -> Result<String> {
    let arg = |i: usize, name: &str| -> Result<Rational> {
        let t = params
            .get(i)
            .ok_or_else(|| Error::invalid(format!("{family} needs {name}")))?;
        parse_rational(t)
    };
    let whole = |q: Rational, name: &str| -> Result<u32> {
        if !q.is_integer() || !q.is_positive() {
            return Err(Error::invalid(format!("{name} must be a positive integer")));
        }
        q.to_integer()
            .try_into()
            .map_err(|_| Error::invalid(format!("{name} is too large")))
    };
    let exact = match family {
        "power_law" => {
            let s = whole(arg(0, "S")?, "S")?;
            let r = arg(1, "R")?;
            symbolic::closed_form_limit_exact(&Schedule::power_law(s, r, 1)?)
        }
        "quadratic" => {
            let s = whole(arg(0, "S")?, "S")?;
            symbolic::closed_form_limit_exact(&Schedule::quadratic(s, 1)?)
        }
        "odd_legs" => {
            let s = whole(arg(0, "S")?, "S")?;
            symbolic::closed_form_limit_exact(&Schedule::odd_legs(s, 1)?)
        }
        "cube" => {
            let m = whole(arg(0, "M")?, "M")? as usize;
            let r = arg(1, "R")?;
            if !r.is_positive() {
                return Err(Error::invalid("r must be positive"));
            }
            Some(cubes::cube_limit(&CubeRule::PowerLaw { r }, m))
        }
        "cube_quadratic" => {
            let m = whole(arg(0, "M")?, "M")? as usize;
            Some(cubes::cube_limit(&CubeRule::Quadratic, m))
        }
        "explicit" => {
            let items = params
                .iter()
                .map(|p| {
                    let (w, l) = p
                        .split_once(':')
                        .ok_or_else(|| Error::invalid("explicit blocks are WIDTH:LEGS"))?;
                    let legs = l
                        .parse::<u64>()
                        .map_err(|_| Error::invalid(format!("bad leg count {l:?}")))?;
                    Ok((parse_rational(w)?, legs))
                })
                .collect::<Result<Vec<_>>>()?;
            let sch = Schedule::explicit(items)?;
            let hi = symbolic::closed_form_limit(&sch, LimitMode::Limsup)?;
            let lo = symbolic::closed_form_limit(&sch, LimitMode::Liminf)?;
            return Ok(format!("limsup={hi:.15} liminf={lo:.15}"));
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown family {other:?} (power_law, quadratic, odd_legs, cube, cube_quadratic, explicit)"
            )))
        }
    };
    let q = exact.expect("analytic families have exact limits");
    Ok(format!(
        "exact={} value={:.15}",
        format_rational(&q),
        rational::to_f64(&q)
    ))
}

/// Outcome of [`cmd_verify`]: one `PASS`/`FAIL`/`SKIP` line per check.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub passed: bool,
    pub text: String,
}

struct Checks {
    passed: bool,
    text: String,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool, detail: impl AsRef<str>) {
        self.passed &= ok;
        let tag = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(self.text, "{tag} {name}: {}", detail.as_ref());
    }

    fn skip(&mut self, name: &str, detail: impl AsRef<str>) {
        let _ = writeln!(self.text, "SKIP {name}: {}", detail.as_ref());
    }
}

const VERIFY_CAP: u64 = 20_000;

pub fn cmd_verify(path: &Path) -> Result<VerifyReport> {
    let artifact = Artifact::read(path)?;
    let mut c = Checks {
        passed: true,
        text: String::new(),
    };
    let rebuilt = artifact.construction.build()?;
    match rebuilt {
        Built::Interval {
            map: fresh,
            schedule,
        } => {
            let stored = artifact.interval_map()?;
            c.record(
                "rebuild",
                stored.same_function(&fresh),
                format!("stored map vs {}", artifact.summary),
            );
            match &schedule {
                Some(s) => verify_schedule(&mut c, &stored, s)?,
                None => c.skip("blocks", "no schedule"),
            }
            if let Construction::Splice { base, eps, .. } = &artifact.construction {
                let d = surgery::sup_distance(&stored, &base_map(base)?)?;
                c.record(
                    "splice-distance",
                    d < eps.0,
                    format!(
                        "sup distance {} < {}",
                        format_rational(&d),
                        format_rational(&eps.0)
                    ),
                );
            }
        }
        Built::Cube(fresh) => {
            let stored = artifact
                .cube
                .as_ref()
                .ok_or_else(|| Error::invalid("artifact holds no cube map"))?;
            let same = serde_json::from_str::<serde_json::Value>(&fresh.to_json()?)? == *stored;
            c.record(
                "rebuild",
                same,
                format!("stored cube vs {}", artifact.summary),
            );
            verify_cube(&mut c, &fresh)?;
        }
    }
    Ok(VerifyReport {
        passed: c.passed,
        text: c.text,
    })
}

fn verify_schedule(c: &mut Checks, map: &PAMap, schedule: &Schedule) -> Result<()> {
    let budget = rational::default_budget();
    let blocks = schedule.blocks()?;
    for b in &blocks {
        let Some(legs) = b.legs_u64().filter(|&l| l <= VERIFY_CAP) else {
            c.skip(&format!("legs[{}]", b.index), "too many legs");
            continue;
        };
        let ends = b.leg_endpoints()?;
        let mut ok = true;
        for (i, w) in ends.windows(2).enumerate() {
            let (from, to) = if i % 2 == 0 {
                (&b.left, &b.right)
            } else {
                (&b.right, &b.left)
            };
            ok &= map.eval(&w[0])? == *from && map.eval(&w[1])? == *to;
            ok &= map.image(&w[0], &w[1])? == (b.left.clone(), b.right.clone());
        }
        c.record(
            &format!("legs[{}]", b.index),
            ok,
            format!("{legs} legs onto the block"),
        );

        for n in 1..=2usize {
            let count = symbolic::cylinder_count(b, n)?;
            if count > VERIFY_CAP.into() {
                break;
            }
            let eps = b.leg_width();
            let ctx = BowenContext::new(map, n + 1)?;
            let cover = estimators::cylinder_cover(&ctx, &eps, &b.left, &b.right, budget)?;
            c.record(
                &format!("cylinders[{},{n}]", b.index),
                rational::from_biguint(count.clone()) == int(cover.len() as i64)
                    && cover.uniform_diameter() == Some(&eps),
                format!("{count} cylinders of diameter {}", format_rational(&eps)),
            );
            let numeric = estimators::cover_critical_exponent(&cover);
            let closed = symbolic::stage_dimension(b, n)?;
            c.record(
                &format!("stage[{},{n}]", b.index),
                (numeric - closed).abs() < 1e-6,
                format!("{numeric:.9} vs {closed:.9}"),
            );
        }
    }

    // brute force at the smallest scale: a valid cover can only do as well
    // as the cylinders or better
    if let Some(b) = blocks
        .iter()
        .find(|b| b.legs_u64().is_some_and(|l| l * l <= 81))
    {
        let eps = b.leg_width();
        let ctx = BowenContext::new(map, 2)?;
        let cyl = estimators::min_hausdorff_sum(
            &ctx,
            &eps,
            1.0,
            &b.left,
            &b.right,
            CoverStrategy::Cylinder,
            budget,
        )?;
        let brute = estimators::min_hausdorff_sum(
            &ctx,
            &eps,
            1.0,
            &b.left,
            &b.right,
            CoverStrategy::Brute { refine: 3 },
            budget,
        )?;
        c.record(
            &format!("cover[{}]", b.index),
            brute > 0.0 && brute <= cyl + 1e-12,
            format!("brute {brute:.6} vs cylinder {cyl:.6} at s = 1"),
        );
    }
    Ok(())
}

fn verify_cube(c: &mut Checks, map: &CubeMap) -> Result<()> {
    let budget = rational::default_budget();
    for p in &map.blocks {
        let block = &p.block;
        if block.leg_count() as u64 > VERIFY_CAP {
            c.skip(&format!("legs[{}]", p.k), "too many legs");
            continue;
        }
        let mut ok = true;
        for q in 0..block.leg_count() {
            ok &= block.leg_image(q)? == block.h_box(q);
        }
        c.record(
            &format!("legs[{}]", p.k),
            ok,
            format!("{} slabs onto their H boxes", block.leg_count()),
        );
    }
    let first = &map.blocks[0];
    for n in 1..=2usize {
        let cover =
            match cubes::cube_cylinder_cover(&first.block, n, budget.min(VERIFY_CAP as usize)) {
                Ok(cv) => cv,
                Err(Error::Budget { .. }) => {
                    c.skip(&format!("cylinders[1,{n}]"), "over the verify cap");
                    continue;
                }
                Err(e) => return Err(e),
            };
        let delta = first.block.cell_width();
        c.record(
            &format!("cylinders[1,{n}]"),
            cover.uniform_diameter() == Some(&delta),
            format!(
                "{} boxes of ρ_{n}-diameter {}",
                cover.len(),
                format_rational(&delta)
            ),
        );
        if map.m == 2 {
            let numeric = estimators::cover_critical_exponent(&cover);
            let closed = cubes::cube_stage_dimension(&map.rule, &map.b, map.m, first.k, n)?;
            c.record(
                &format!("stage[1,{n}]"),
                (numeric - closed).abs() < 1e-6,
                format!("{numeric:.9} vs {closed:.9}"),
            );
        } else {
            c.skip(
                &format!("stage[1,{n}]"),
                "cylinder count differs from 3^{knm} for m >= 3",
            );
        }
    }
    Ok(())
}

/// Splices into the identity (or the map in `base`), writes the artifact to
/// `out` if given, and returns the certificate JSON.
pub fn cmd_splice(
    base: Option<&Path>,
    p: &str,
    a: &str,
    eps: &str,
    blocks: usize,
    out: Option<&Path>,
) -> Result<String> {
    let base = base
        .map(|path| Artifact::read(path).map(|art| Box::new(art.construction)))
        .transpose()?;
    let (p, a, eps) = (parse_rational(p)?, parse_rational(a)?, parse_rational(eps)?);
    let phi0 = base_map(&base)?;
    let sp = surgery::splice(&phi0, &p, &a, &eps, blocks)?;
    if let Some(path) = out {
        let construction = Construction::Splice {
            base,
            p: Q(p.clone()),
            a: Q(a.clone()),
            eps: Q(eps.clone()),
            blocks,
        };
        let (artifact, _) = Artifact::from_construction(construction)?;
        fs::write(path, artifact.to_json()?)?;
    }
    Ok(sp.certificate_json(&p, &a, &eps)? + "\n")
}

#[derive(Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
enum DetectOutput<C: Serialize> {
    Certified { certificate: C },
    Refused { refusal: surgery::Refusal },
}

fn verdict_json<C: Serialize>(v: std::result::Result<C, surgery::Refusal>) -> Result<String> {
    let out = match v {
        Ok(certificate) => DetectOutput::Certified { certificate },
        Err(refusal) => DetectOutput::Refused { refusal },
    };
    Ok(serde_json::to_string_pretty(&out)? + "\n")
}

/// Runs the interval or cube detector and returns its verdict as JSON.
pub fn cmd_detect(
    path: &Path,
    j: Option<&str>,
    legs: Option<&str>,
    eps: &str,
    k: Option<usize>,
    block: Option<usize>,
) -> Result<String> {
    let artifact = Artifact::read(path)?;
    let eps = parse_rational(eps)?;
    match artifact.construction.build()? {
        Built::Cube(map) => {
            let idx = block.unwrap_or(1);
            let placed = map.block(idx)?;
            verdict_json(cubes::is_strong_cube_horseshoe(&placed.block, &eps)?)
        }
        Built::Interval { .. } => {
            let map = artifact.interval_map()?;
            let j = parse_list(j.ok_or_else(|| Error::invalid("--j a,b is required"))?)?;
            if j.len() != 2 {
                return Err(Error::invalid("--j takes exactly two endpoints"));
            }
            let cuts = parse_list(legs.ok_or_else(|| Error::invalid("--legs is required"))?)?;
            if cuts.len() < 2 {
                return Err(Error::invalid("--legs needs at least two cut points"));
            }
            let legs: Vec<(Rational, Rational)> = cuts
                .windows(2)
                .map(|w| (w[0].clone(), w[1].clone()))
                .collect();
            let k = k.unwrap_or(legs.len());
            verdict_json(surgery::is_strong_horseshoe(
                &map,
                (&j[0], &j[1]),
                &legs,
                &eps,
                k,
            )?)
        }
    }
}

/// Stage rows `k = 1..=k_max` at stage `n`; `normalized = dim/n`.
pub fn cmd_cube(
    m: usize,
    rule: &CubeRule,
    b: &Rational,
    k_max: usize,
    n: usize,
    enumerate: bool,
) -> Result<DimEstimate> {
    if k_max == 0 || n == 0 {
        return Err(Error::invalid("k_max and n must be at least 1"));
    }
    let budget = rational::default_budget();
    let mut stages = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let side = rule.side(b, k)?;
        let cells = int(2) * rational::from_biguint(rational::pow3(k as u64)) - int(1);
        let eps = &side / &cells;
        let dim = if enumerate {
            let kappa = (rational::pow3(k as u64) - 1u32) / 2u32;
            let kappa: u64 = kappa
                .try_into()
                .map_err(|_| Error::invalid("leg parameter overflows"))?;
            let block = CubeBlock::new(m, kappa, Rational::zero(), side, Rational::zero(), budget)?;
            estimators::cover_critical_exponent(&cubes::cube_cylinder_cover(&block, n, budget)?)
        } else {
            cubes::cube_stage_dimension(rule, b, m, k, n)?
        };
        stages.push(DimensionStage {
            k,
            n,
            eps,
            dim,
            normalized: dim / n as f64,
        });
    }
    DimEstimate::from_stages(stages)
}
