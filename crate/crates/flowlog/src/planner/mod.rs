//! From selected join trees to an executable plan dag.
//!
//! [`translate_rule`] lowers each rule variant to fine-grained positional
//! operators, [`fuse`] collapses the projection chains, and [`DagBuilder`]
//! interns everything so identical subplans across variants and rules
//! become one node. [`plan_program`] runs the whole pipeline and keeps the
//! per-rule selection reports for plan explanations.

pub mod fuse;
pub mod ir;
pub mod share;
pub mod translate;

pub use fuse::fuse;
pub use ir::{
    FilterCond, Op, PlanDag, PlanNode, PlanVariant, ProjSource, Role, RulePlans,
};
pub use share::DagBuilder;
pub use translate::translate_rule;

use crate::frontend::{build_rule_catalog, Program, Stratification};
use crate::optimizer::{
    listing_chain, plan_cost, select_plan_with_cap, SelectedPlan, DEFAULT_CANDIDATE_CAP,
};

#[derive(Debug, Clone)]
pub struct PlannerOptions {
    /// Enumerate and cost join trees; off means the body listing order.
    pub optimize_joins: bool,
    pub fuse: bool,
    pub share: bool,
    pub candidate_cap: usize,
}

impl Default for PlannerOptions {
    fn default() -> PlannerOptions {
        PlannerOptions {
            optimize_joins: true,
            fuse: true,
            share: true,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

/// Why each rule's plan looks the way it does.
#[derive(Debug, Clone)]
pub struct RulePlanReport {
    pub rule_id: usize,
    pub selection: SelectedPlan,
    /// Body occurrences that get a semi-naive delta variant.
    pub delta_positions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PlannedProgram {
    pub dag: PlanDag,
    pub reports: Vec<RulePlanReport>,
}

/// Plan every rule of a validated, stratified program.
pub fn plan_program(
    program: &Program,
    strat: &Stratification,
    opts: &PlannerOptions,
) -> PlannedProgram {
    let mut builder = DagBuilder::new(opts.share);
    let mut rules = Vec::new();
    let mut reports = Vec::new();

    for (idx, rule) in program.rules.iter().enumerate() {
        let catalog = build_rule_catalog(rule);
        let selection = if opts.optimize_joins {
            select_plan_with_cap(rule, &catalog, opts.candidate_cap)
        } else {
            let jst = listing_chain(&catalog);
            let cost = plan_cost(&jst, rule, &catalog);
            SelectedPlan { jst, cost, alternatives: Vec::new(), fallback: None }
        };

        // A recursive rule re-fires per round, once per body occurrence of
        // a relation still evolving in its own stratum.
        let mut delta_positions = Vec::new();
        if strat.is_recursive_rule(idx) {
            let stratum = strat.rule_stratum[idx];
            for (i, atom) in rule.positive_atoms() {
                if strat.relation_stratum.get(&atom.relation) == Some(&stratum) {
                    delta_positions.push(i);
                }
            }
        }

        let mut variants = Vec::new();
        for delta_at in
            std::iter::once(None).chain(delta_positions.iter().map(|&i| Some(i)))
        {
            let mut tree = translate_rule(program, rule, &catalog, &selection.jst, delta_at);
            if opts.fuse {
                tree = fuse(tree);
            }
            variants.push(PlanVariant { delta_at, root: builder.intern(&tree) });
        }

        rules.push(RulePlans {
            rule_id: rule.id,
            relation: rule.head.relation.clone(),
            variants,
        });
        reports.push(RulePlanReport { rule_id: rule.id, selection, delta_positions });
    }

    PlannedProgram { dag: builder.finish(rules), reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program, stratify, DependencyGraph};

    const EVEN_HOP: &str = "\
        .decl edge(a: number, b: number)\n\
        .decl source(a: number)\n\
        .decl reach(a: number)\n\
        .input edge\n\
        .input source\n\
        .output reach\n\
        reach(x) :- source(x).\n\
        reach(x) :- edge(x, y), edge(y, z), reach(z).";

    fn planned(src: &str, opts: &PlannerOptions) -> PlannedProgram {
        let program = parse_program(src).unwrap();
        let graph = DependencyGraph::build(&program);
        let strat = stratify(&program, &graph).unwrap();
        plan_program(&program, &strat, opts)
    }

    #[test]
    fn recursive_rules_get_one_delta_variant_per_recursive_occurrence() {
        let planned = planned(EVEN_HOP, &PlannerOptions::default());
        let copy = &planned.dag.rules[0];
        assert_eq!(copy.variants.len(), 1);
        assert_eq!(copy.variants[0].delta_at, None);

        let rec = &planned.dag.rules[1];
        assert_eq!(rec.relation, "reach");
        assert_eq!(
            rec.variants.iter().map(|v| v.delta_at).collect::<Vec<_>>(),
            [None, Some(2)]
        );
        assert_ne!(rec.variants[0].root, rec.variants[1].root);
        assert_eq!(planned.reports[1].delta_positions, [2]);
    }

    #[test]
    fn sharing_collapses_repeated_arrangements() {
        let shared = planned(EVEN_HOP, &PlannerOptions::default());
        assert!(shared.dag.shared_count >= 1);

        let unshared =
            planned(EVEN_HOP, &PlannerOptions { share: false, ..PlannerOptions::default() });
        assert_eq!(unshared.dag.shared_count, 0);
        assert!(unshared.dag.ops.len() > shared.dag.ops.len());
    }

    #[test]
    fn fusion_shrinks_the_dag() {
        let fused = planned(EVEN_HOP, &PlannerOptions::default());
        let unfused =
            planned(EVEN_HOP, &PlannerOptions { fuse: false, ..PlannerOptions::default() });
        assert!(fused.dag.ops.len() < unfused.dag.ops.len());
    }

    #[test]
    fn listing_mode_plans_the_body_order() {
        let opts = PlannerOptions { optimize_joins: false, ..PlannerOptions::default() };
        let planned = planned(EVEN_HOP, &opts);
        let report = &planned.reports[1];
        assert!(report.selection.alternatives.is_empty());
        assert_eq!(report.selection.jst.root(), 2); // last body atom
        assert_eq!(report.selection.jst.post_order, [0, 1, 2]);
    }

    #[test]
    fn variant_roots_resolve_to_valid_nodes() {
        let planned = planned(EVEN_HOP, &PlannerOptions::default());
        let dag = &planned.dag;
        for rule in &dag.rules {
            for v in &rule.variants {
                assert!(v.root < dag.ops.len());
                // Rule outputs are unkeyed tuple streams.
                assert_eq!(dag.key_len(v.root), 0);
            }
        }
    }
}
