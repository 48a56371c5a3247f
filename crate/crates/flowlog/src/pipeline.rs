//! From program text to results: parse, stratify, rewrite, plan, run.
//!
//! [`compile`] performs every static stage and returns a
//! [`CompiledProgram`] that can be run over any input database, explain
//! its plans, or render run statistics. The `flowlog` binary is a thin
//! wrapper around this module.

use std::fmt;

use crate::engine::{evaluate, Database, EngineOptions, EvalError, EvalResult, EvalStats};
use crate::frontend::{
    build_rule_catalog, parse_program, stratify, DependencyGraph, ParseError, Program,
    Stratification, UnstratifiableProgram,
};
use crate::io::IoError;
use crate::optimizer::{rewrite_program, Fallback, SipMode, DEFAULT_CANDIDATE_CAP};
use crate::planner::{plan_program, PlannedProgram, PlannerOptions};

#[derive(Debug, Clone)]
pub struct Options {
    /// Search join orders; off plans every body in listing order.
    pub optimize_joins: bool,
    pub sip: SipMode,
    pub fuse: bool,
    pub share: bool,
    pub count_diffs: bool,
    pub workers: usize,
    pub max_iterations: Option<u64>,
    pub candidate_cap: usize,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            optimize_joins: true,
            sip: SipMode::default(),
            fuse: true,
            share: true,
            count_diffs: false,
            workers: 1,
            max_iterations: None,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

#[derive(Debug)]
pub enum Error {
    Parse(ParseError),
    Unstratifiable(UnstratifiableProgram),
    Io(IoError),
    Eval(EvalError),
}

impl Error {
    /// Process exit code for the command line: 10 syntax, 11 arity, 12
    /// undeclared relation, 13 unsafe rule, 14 unstratifiable, 20
    /// malformed row, 21 other io, 30 no convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(e) => match e {
                ParseError::Syntax { .. }
                | ParseError::DuplicateDeclaration { .. }
                | ParseError::InputOnDerived { .. } => 10,
                ParseError::ArityMismatch { .. } => 11,
                ParseError::UndeclaredRelation { .. } => 12,
                ParseError::UnsafeRule { .. } | ParseError::MixedAggregate { .. } => 13,
            },
            Error::Unstratifiable(_) => 14,
            Error::Io(IoError::MalformedRow { .. }) => 20,
            Error::Io(IoError::Io { .. }) => 21,
            Error::Eval(EvalError::IterationLimit { .. }) => 30,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(e) => e.fmt(f),
            Error::Unstratifiable(e) => e.fmt(f),
            Error::Io(e) => e.fmt(f),
            Error::Eval(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for Error {}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Error {
        Error::Parse(e)
    }
}
impl From<UnstratifiableProgram> for Error {
    fn from(e: UnstratifiableProgram) -> Error {
        Error::Unstratifiable(e)
    }
}
impl From<IoError> for Error {
    fn from(e: IoError) -> Error {
        Error::Io(e)
    }
}
impl From<EvalError> for Error {
    fn from(e: EvalError) -> Error {
        Error::Eval(e)
    }
}

/// A program with its strata and plans, ready to run.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    /// The program actually planned, sip auxiliary rules included.
    pub program: Program,
    pub strat: Stratification,
    pub planned: PlannedProgram,
    /// Rules replaced by their sip-reduced form.
    pub sip_rewritten: Vec<usize>,
    options: Options,
}

/// Run every static stage on `source`.
pub fn compile(source: &str, options: &Options) -> Result<CompiledProgram, Error> {
    let program = parse_program(source)?;
    let graph = DependencyGraph::build(&program);
    let strat = stratify(&program, &graph)?;

    let (program, sip_rewritten) = rewrite_program(&program, &strat, options.sip);
    // Auxiliary rules join their host's component, so re-derive strata.
    let graph = DependencyGraph::build(&program);
    let strat = stratify(&program, &graph)?;

    let planner = PlannerOptions {
        optimize_joins: options.optimize_joins,
        fuse: options.fuse,
        share: options.share,
        candidate_cap: options.candidate_cap,
    };
    let planned = plan_program(&program, &strat, &planner);
    Ok(CompiledProgram { program, strat, planned, sip_rewritten, options: options.clone() })
}

impl CompiledProgram {
    pub fn run(&self, inputs: &Database) -> Result<EvalResult, Error> {
        let engine = EngineOptions {
            workers: self.options.workers,
            max_iterations: self.options.max_iterations,
            count_diffs: self.options.count_diffs,
        };
        evaluate(&self.program, &self.planned, &self.strat, inputs, &engine)
            .map_err(Error::from)
    }

    /// A plain-text account of every rule's plan and the shared dag.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let p = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };

        p(&mut out, format!(
            "relations: {} ({} input, {} output)",
            self.program.relations.len(),
            self.program.inputs.len(),
            self.program.outputs.len()
        ));
        p(&mut out, format!(
            "rules: {} in {} strata",
            self.program.rules.len(),
            self.strat.strata.len()
        ));
        if !self.sip_rewritten.is_empty() {
            p(&mut out, format!("sip: rewrote rules {:?}", self.sip_rewritten));
        }

        for (rule, report) in self.program.rules.iter().zip(&self.planned.reports) {
            p(&mut out, String::new());
            p(&mut out, format!("rule {}: {rule}", rule.id));

            let stratum = self.strat.rule_stratum[rule.id];
            let mut line = format!("  stratum {stratum}");
            if self.strat.recursive[stratum] {
                line.push_str(" (recursive)");
            }
            if !report.delta_positions.is_empty() {
                line.push_str(&format!(", delta at positions {:?}", report.delta_positions));
            }
            p(&mut out, line);

            let catalog = build_rule_catalog(rule);
            if !catalog.semijoins.is_empty() {
                let list: Vec<String> = catalog
                    .semijoins
                    .iter()
                    .map(|s| format!("{}[{}] on [{}]", rule.body[s.body_index], s.body_index, s.host))
                    .collect();
                p(&mut out, format!("  prefilters: {}", list.join("; ")));
            }
            if !catalog.antijoins.is_empty() {
                let list: Vec<String> = catalog
                    .antijoins
                    .iter()
                    .map(|a| format!("{}[{}]", rule.body[a.body_index], a.body_index))
                    .collect();
                p(&mut out, format!("  antijoins: {}", list.join("; ")));
            }

            let jst = &report.selection.jst;
            let tree: Vec<String> = catalog
                .nodes
                .iter()
                .map(|n| {
                    let atom = &rule.body[n.body_index];
                    match jst.parent.get(&n.body_index) {
                        Some(parent) => format!("{atom}[{}] under [{parent}]", n.body_index),
                        None => format!("root {atom}[{}]", n.body_index),
                    }
                })
                .collect();
            p(&mut out, format!("  join tree: {}", tree.join("; ")));

            let cost = &report.selection.cost;
            let mut line = format!("  cost {}", cost.total);
            if !report.selection.alternatives.is_empty() {
                line.push_str(&format!(
                    " (picked from {} candidates)",
                    report.selection.alternatives.len()
                ));
            }
            p(&mut out, line);
            for (label, width) in &cost.per_step {
                p(&mut out, format!("    {label} = {width}"));
            }
            match report.selection.fallback {
                Some(Fallback::SearchSpaceExceeded { pairs }) => p(&mut out, format!(
                    "  note: {pairs} candidate pairs blew the search cap; listing order used"
                )),
                Some(Fallback::ListingCheaper) => p(&mut out, "  note: listing order beats every spanning tree; using it".into()),
                None => {}
            }

            let plans = &self.planned.dag.rules[rule.id];
            let variants: Vec<String> = plans
                .variants
                .iter()
                .map(|v| match v.delta_at {
                    None => format!("base=#{}", v.root),
                    Some(i) => format!("delta@{i}=#{}", v.root),
                })
                .collect();
            p(&mut out, format!("  variants: {}", variants.join(" ")));
        }

        let dag = &self.planned.dag;
        p(&mut out, String::new());
        p(&mut out, format!(
            "plan dag: {} nodes, {} shared references",
            dag.ops.len(),
            dag.shared_count
        ));
        for id in 0..dag.ops.len() {
            p(&mut out, format!("  #{id} {}", dag.render(id)));
        }
        out
    }
}

/// Render run statistics as line-oriented `key=value` records, one line
/// per stratum, rule, and subplan. The free-text `plan=` field comes
/// last so the rest of each line splits on whitespace.
pub fn render_stats(stats: &EvalStats) -> String {
    let mut out = String::new();
    for s in &stats.strata {
        let rounds: Vec<String> = s.new_facts_per_round.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!(
            "stratum={} recursive={} rounds={} new_facts={}\n",
            s.stratum,
            s.recursive,
            s.rounds,
            rounds.join(",")
        ));
    }
    for r in &stats.rules {
        out.push_str(&format!(
            "rule={} relation={} derived={}\n",
            r.rule_id, r.relation, r.derived
        ));
    }
    for s in &stats.subplans {
        out.push_str(&format!(
            "subplan={} kind={} arrangement={} builds={} merges={} tuples={} peak={} plan={}\n",
            s.op,
            s.kind,
            s.arrangement,
            s.builds,
            s.incremental_merges,
            s.tuples,
            s.peak_rows,
            s.description
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_evaluate;
    use std::collections::BTreeSet;

    const TC: &str = "\
        .decl edge(a: number, b: number)\n\
        .decl tc(a: number, b: number)\n\
        .input edge\n\
        .output tc\n\
        tc(x, y) :- edge(x, y).\n\
        tc(x, z) :- tc(x, y), tc(y, z).\n";

    fn edge_db(edges: &[(i64, i64)]) -> Database {
        [(
            "edge".to_string(),
            edges.iter().map(|&(a, b)| vec![a, b]).collect::<BTreeSet<_>>(),
        )]
        .into()
    }

    #[test]
    fn compile_and_run_matches_the_naive_evaluator() {
        let compiled = compile(TC, &Options::default()).unwrap();
        let inputs = edge_db(&[(1, 2), (2, 3), (3, 1), (3, 4)]);
        let result = compiled.run(&inputs).unwrap();
        let program = parse_program(TC).unwrap();
        let expected = naive_evaluate(&program, &inputs).unwrap();
        assert_eq!(result.database["tc"], expected["tc"]);
    }

    #[test]
    fn error_classes_map_to_distinct_exit_codes() {
        let cases: Vec<(&str, i32)> = vec![
            (".decl p(x: number\n", 10),
            (
                ".decl e(a: number, b: number)\n.decl p(a: number)\n.input e\np(x) :- e(x).\n",
                11,
            ),
            (".decl p(a: number)\np(x) :- ghost(x).\n", 12),
            (
                ".decl e(a: number)\n.decl p(a: number)\n.input e\np(y) :- e(x).\n",
                13,
            ),
            (
                ".decl e(a: number)\n.decl a(x: number)\n.decl b(x: number)\n.input e\n\
                 a(x) :- e(x), !b(x).\nb(x) :- a(x).\n",
                14,
            ),
        ];
        for (src, code) in cases {
            let err = compile(src, &Options::default()).unwrap_err();
            assert_eq!(err.exit_code(), code, "source:\n{src}");
        }

        let limited = Options { max_iterations: Some(1), ..Options::default() };
        let compiled = compile(TC, &limited).unwrap();
        let err = compiled.run(&edge_db(&[(1, 2), (2, 3), (3, 4)])).unwrap_err();
        assert_eq!(err.exit_code(), 30);
    }

    #[test]
    fn explain_names_every_rule_and_dag_node() {
        let compiled = compile(TC, &Options::default()).unwrap();
        let text = compiled.explain();
        assert!(text.contains("rule 0: tc(x, y) :- edge(x, y)."));
        assert!(text.contains("rule 1: tc(x, z) :- tc(x, y), tc(y, z)."));
        assert!(text.contains("(recursive), delta at positions [0, 1]"));
        assert!(text.contains("join tree: root tc(x, y)[0]; tc(y, z)[1] under [0]"));
        assert!(text.contains("plan dag:"));
        assert!(text.contains("#0 scan"));
        assert!(text.contains("variants: base=#"));
    }

    #[test]
    fn stats_render_one_record_per_line() {
        let compiled = compile(TC, &Options::default()).unwrap();
        let result = compiled.run(&edge_db(&[(1, 2), (2, 3)])).unwrap();
        let text = render_stats(&result.stats);
        assert!(text.lines().any(|l| l.starts_with("stratum=0 recursive=false rounds=1")));
        assert!(text.lines().any(|l| l.starts_with("rule=0 relation=tc derived=2")));
        assert!(text
            .lines()
            .any(|l| l.contains("kind=scan") && l.contains("plan=scan edge (edb, arity 2)")));
        assert!(text.lines().all(|l| l.contains('=')));
    }

    #[test]
    fn toggles_do_not_change_results() {
        let inputs = edge_db(&[(1, 2), (2, 3), (3, 1), (2, 4)]);
        let base = compile(TC, &Options::default()).unwrap().run(&inputs).unwrap();
        let variations = [
            Options { optimize_joins: false, ..Options::default() },
            Options { fuse: false, ..Options::default() },
            Options { share: false, ..Options::default() },
            Options { count_diffs: true, ..Options::default() },
            Options { sip: SipMode::ForceOn, ..Options::default() },
            Options { workers: 3, ..Options::default() },
        ];
        for options in variations {
            let got = compile(TC, &options).unwrap().run(&inputs).unwrap();
            assert_eq!(got.database["tc"], base.database["tc"], "options {options:?}");
        }
    }

    #[test]
    fn sip_rewrites_show_up_in_the_compiled_program() {
        let src = "\
            .decl c(a: number, b: number, c: number)\n\
            .decl p(a: number, b: number)\n\
            .decl p_in(a: number, b: number)\n\
            .input c\n\
            .input p_in\n\
            .output p\n\
            p(x, y) :- p_in(x, y).\n\
            p(x, z) :- c(y, w, z), p(x, w), p(x, y).\n";
        let compiled = compile(src, &Options::default()).unwrap();
        assert_eq!(compiled.sip_rewritten, vec![1]);
        assert!(compiled.program.rules.len() > 2);
        assert!(compiled.explain().contains("sip: rewrote rules [1]"));

        let inputs: Database = [
            (
                "c".to_string(),
                BTreeSet::from([vec![1, 2, 3], vec![2, 3, 4]]),
            ),
            (
                "p_in".to_string(),
                BTreeSet::from([vec![5, 1], vec![5, 2], vec![6, 2]]),
            ),
        ]
        .into();
        let result = compiled.run(&inputs).unwrap();
        let off = Options { sip: SipMode::Off, ..Options::default() };
        let plain = compile(src, &off).unwrap().run(&inputs).unwrap();
        assert_eq!(result.database["p"], plain.database["p"]);
    }
}
