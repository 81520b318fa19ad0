"""
Main CLI interface for the gathering toolkit.

Simulates single runs, executes verification sweeps, replays adversary
scenarios, certifies move tables and exports transition graphs.

Exit codes: 0 success, 1 violations or a run that did not gather,
2 invalid input (including ungatherable initial placements).
"""

import argparse
import os
import random
import sys
from typing import Dict, List, Optional

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from adversary import (AdversaryScenario, build_algorithm, build_topology, clique_bipartite_scenarios,
                       clique_fill_scenario, full_graph_scenario, p2_scenario, p3_scenario,
                       prove_nontermination)
from config import Config
from errors import CapabilityError, ContractViolation, GatheringError, InputError, UngatherableInitialError
from gather_grid import EXPECTED_TRANSITIONS as GRID_TRANSITIONS
from gather_grid import synthesize_32_table
from gather_hypercube import ALLOWED_TASK_CYCLES, EXPECTED_TRANSITIONS as HYPERCUBE_TRANSITIONS
from gather_hypercube import synthesize_t1_table
from storage import ArtifactStorage, ScenarioFile
from swarm import Configuration, Placement, Schedule, SwarmEngine, Verdict, make_resolver
from topology import SquareGrid, Topology
from utils.logger import log_critical_error, setup_logger
from utils.validators import InputValidator, format_validation_errors
from verifier import (SweepRunner, SweepSpec, certify_table, check_lower_bound, export_class_graph,
                      export_task_graph, task_cycles, unexpected_pairs)


EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2

STATUS_TO_EXPECTED = {
    "recurrence": Verdict.RECURRENCE_DETECTED.value,
    "gathered": Verdict.GATHERED.value,
    "rejected": "rejected",
    "inconclusive": Verdict.HORIZON_EXHAUSTED.value,
}
TASK_TABLES = {"hypercube": HYPERCUBE_TRANSITIONS, "grid": GRID_TRANSITIONS}


class GatheringCLI:
    """Command-line interface over the engine, verifier and adversary modules."""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.logger = setup_logger("cli", self.config.log_level, self.config.log_dir)

    def storage(self, out: Optional[str]) -> ArtifactStorage:
        directory = self.config.output_dir
        if out and os.path.dirname(out):
            directory = os.path.dirname(out)
        return ArtifactStorage(directory, self.config.log_level, self.config.log_dir)

    # -- inputs ----------------------------------------------------------

    def parse_placement(self, topology: Topology, text: str) -> Placement:
        try:
            entries = InputValidator.split_placement(text)
        except ValueError as e:
            raise InputError(str(e))
        counts: Dict[str, int] = {}
        for vertex, count in entries:
            counts[vertex] = counts.get(vertex, 0) + count
        validation = InputValidator.validate_counts(counts)
        if validation.warnings or not validation.is_valid:
            print(format_validation_errors(validation))
        if not validation.is_valid:
            raise InputError("Invalid placement")
        return Placement.from_counts({topology.parse_vertex(v): n for v, n in counts.items()})

    def random_placement(self, topology: Topology, robots: int, seed: int, mbr: str,
                         algorithm) -> Placement:
        """Seeded placement outside the algorithm's ungatherable family."""
        if isinstance(topology, SquareGrid):
            rows, columns = InputValidator.parse_mbr(mbr)
            cells = [(r, c) for r in range(rows) for c in range(columns)]
        elif topology.is_finite:
            cells = topology.vertices()
        else:
            raise InputError(f"Random placements are not supported on {topology.kind}")
        if robots < 2:
            raise InputError("Random placements need at least two robots")
        rng = random.Random(seed)
        for _ in range(1000):
            placement = Placement.from_positions(rng.choice(cells) for _ in range(robots))
            if len(placement.occupied) < 2:
                continue
            if not algorithm.ungatherable_witness(Configuration(topology, placement.occupied)):
                return placement
        raise InputError("Could not sample a gatherable placement; try another seed")

    def parse_schedule(self, text: str, k: int, seed: int) -> Schedule:
        if text == "identity":
            return Schedule.identity(k)
        if text == "random":
            return Schedule.shuffled(k, seed)
        try:
            return Schedule(InputValidator.parse_schedule(text, k))
        except ValueError as e:
            raise InputError(str(e))

    # -- commands --------------------------------------------------------

    def simulate(self, args: argparse.Namespace) -> int:
        topology = build_topology(args.topology, args.dim)
        algorithm = build_algorithm(args.algorithm, topology)
        if args.placement:
            placement = self.parse_placement(topology, args.placement)
        else:
            placement = self.random_placement(topology, args.robots, args.seed, args.mbr, algorithm)
        schedule = self.parse_schedule(args.schedule, placement.k, args.seed)
        horizon = args.horizon_epochs or self.config.horizon_epochs

        engine = SwarmEngine(topology, algorithm, make_resolver(args.resolver, args.seed),
                             self.config.log_level, self.config.log_dir)
        try:
            result = engine.run(placement, schedule, horizon)
        except UngatherableInitialError as e:
            print(f"❌ Initial configuration is ungatherable: {e.witness}")
            return EXIT_INPUT

        storage = self.storage(args.out)
        storage.save_trace(result.trace, os.path.basename(args.out) if args.out else "trace.jsonl")

        if result.gathered:
            bound = check_lower_bound(result)
            print(f"✅ gathered in {result.epochs_used} epochs ({result.rounds} rounds, "
                  f"lower bound {result.lower_bound})")
            if not bound.passed:
                print(f"❌ {bound.message}")
                return EXIT_VIOLATION
            return EXIT_OK
        print(f"⚠️  {result.verdict.value} after {result.rounds} rounds")
        if result.certificate:
            print(f"   loop from round {result.certificate.loop_start_round}, span {result.certificate.span}")
        return EXIT_VIOLATION

    def sweep(self, args: argparse.Namespace) -> int:
        rows, columns = InputValidator.parse_mbr(args.mbr)
        spec = SweepSpec(
            topology=args.topology,
            dimension=args.dim or 3,
            mbr_rows=rows,
            mbr_cols=columns,
            max_robots=args.robots,
            max_multiplicity=args.multiplicity or self.config.max_multiplicity,
            placement_policy=args.placements,
            samples=args.samples,
            schedule_policy=args.schedule,
            resolver_policy=args.resolver,
            horizon_epochs=args.horizon_epochs or self.config.horizon_epochs,
            seed=args.seed,
            max_instances=self.config.max_sweep_instances,
        )
        workers = args.workers or self.config.sweep_workers
        runner = SweepRunner(self.config.log_level, self.config.log_dir)
        report = runner.run(spec, args.algorithm, workers)
        data = report.to_dict()

        failed = not report.passed
        expected = TASK_TABLES.get(spec.topology if args.algorithm == "auto" else args.algorithm)
        if expected is not None:
            bad = unexpected_pairs(report.transition_pairs, expected)
            data["unexpected_transitions"] = [list(p) for p in bad]
            failed = failed or bool(bad)
        if spec.topology == "hypercube" and args.algorithm in ("auto", "hypercube"):
            cycles = task_cycles(report.transition_pairs)
            extra = [c for c in cycles if c not in ALLOWED_TASK_CYCLES]
            data["task_cycles"] = [list(c) for c in cycles]
            failed = failed or bool(extra)

        storage = self.storage(args.out)
        storage.save_report(data, os.path.basename(args.out) if args.out else "sweep.json")
        for index, violation in enumerate(report.violations):
            storage.save_scenario(ScenarioFile.from_violation(violation, spec, args.algorithm, index))

        print(f"{'❌' if failed else '✅'} {report.instances} instances, {report.gathered} gathered, "
              f"{report.rejected} rejected, {len(report.violations)} violations")
        print(f"   max epochs {report.max_epochs}, epochs per diameter {report.epoch_ratio:.3f}")
        return EXIT_VIOLATION if failed else EXIT_OK

    def _scenarios(self, args: argparse.Namespace) -> List[AdversaryScenario]:
        if args.scenario_file:
            loaded = self.storage(None).load_scenario(args.scenario_file)
            if loaded is None:
                raise InputError(f"Cannot read scenario file {args.scenario_file}")
            return [loaded.to_scenario()]
        name = args.scenario
        if name in ("clique", "bipartite"):
            return [s for s in clique_bipartite_scenarios(args.n) if s.name.startswith(name)]
        if name == "clique-fill":
            return [clique_fill_scenario(args.n)]
        topology = build_topology(args.topology, args.dim)
        if name == "p2":
            return [p2_scenario(topology, algorithm=args.algorithm or "greedy")]
        if name == "full":
            return [full_graph_scenario(topology, algorithm_name=args.algorithm or "toward-occupied")]
        if name == "p3":
            return [p3_scenario(topology, args.p3_class)]
        raise InputError(f"Unknown scenario '{name}'")

    def adversary(self, args: argparse.Namespace) -> int:
        mismatches = 0
        storage = self.storage(args.out)
        for scenario in self._scenarios(args):
            outcome = prove_nontermination(scenario, log_dir=self.config.log_dir,
                                           enforce_initial=not args.skip_initial_check)
            observed = STATUS_TO_EXPECTED[outcome.status]
            mark = "✅" if observed == scenario.expected else "❌"
            print(f"{mark} {scenario.name} vs {scenario.algorithm}: {outcome.status} (expected {scenario.expected})")
            if outcome.certificate:
                c = outcome.certificate
                print(f"   certificate: loop from round {c.loop_start_round}, span {c.span}, "
                      f"{'valid' if outcome.certificate_valid else 'INVALID'}")
                if not outcome.certificate_valid:
                    mismatches += 1
            if outcome.witness:
                print(f"   witness: {outcome.witness}")
            if outcome.result and outcome.result.gathered:
                print(f"   gathered in {outcome.result.epochs_used} epochs")
            if args.save_scenario:
                storage.save_scenario(ScenarioFile.from_scenario(scenario))
            mismatches += observed != scenario.expected
        return EXIT_VIOLATION if mismatches else EXIT_OK

    def certify(self, args: argparse.Namespace) -> int:
        tables = {"q3": synthesize_t1_table, "grid": synthesize_32_table}
        chosen = list(tables) if args.table == "all" else [args.table]
        storage = self.storage(args.out)
        failed = False
        for kind in chosen:
            table = tables[kind]()
            report = certify_table(table, kind, strict=False)
            storage.save_table(table)
            storage.save_report(report.to_dict(), f"{table.name}.certificate.json")
            print(f"{'✅' if report.passed else '❌'} {table.name}: {report.class_count} classes, "
                  f"max depth {report.max_depth}")
            for failure in report.failures:
                print(f"   • {failure}")
            failed = failed or not report.passed
        return EXIT_VIOLATION if failed else EXIT_OK

    def export_graph(self, args: argparse.Namespace) -> int:
        if args.table:
            table = synthesize_t1_table() if args.table == "q3" else synthesize_32_table()
            text, default = export_class_graph(table), f"{table.name}.dot"
        else:
            text, default = export_task_graph(TASK_TABLES[args.tasks], f"{args.tasks}-tasks"), f"{args.tasks}-tasks.dot"
        name = os.path.basename(args.out) if args.out else default
        path = self.storage(args.out).save_text(text, name)
        if path is None:
            return EXIT_VIOLATION
        print(f"✅ wrote {path}")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Gathering of oblivious robots on hypercubes and square grids",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py simulate --topology hypercube --dim 4 --robots 5 --seed 7
  python main.py simulate --topology grid --placement "(0,0)*2;(2,3)"
  python main.py sweep --topology hypercube --dim 3 --robots 4
  python main.py adversary --scenario p2 --topology grid --algorithm greedy
  python main.py certify --table all
  python main.py export-graph --tasks hypercube --out artifacts/tasks.dot
        """
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub, topology_default="hypercube"):
        sub.add_argument('--topology', default=topology_default,
                         choices=["hypercube", "grid", "clique", "bipartite"])
        sub.add_argument('--dim', type=int, help='Hypercube dimension')
        sub.add_argument('--seed', type=int, default=0)
        sub.add_argument('--horizon-epochs', type=int)
        sub.add_argument('--out', help='Output file; its directory receives all artifacts')

    simulate = commands.add_parser('simulate', help='Run one execution and write its trace')
    common(simulate)
    simulate.add_argument('--algorithm', default='auto', help='hypercube | grid | strawman:<name>')
    simulate.add_argument('--placement', help='e.g. "000*2;011" or "(0,0)*2;(1,1)"')
    simulate.add_argument('--robots', type=int, default=4, help='Robots for a random placement')
    simulate.add_argument('--mbr', default='4x4', help='Window for random grid placements')
    simulate.add_argument('--schedule', default='identity', help='identity | random | 0,2,1,...')
    simulate.add_argument('--resolver', default='canonical', choices=['canonical', 'random'])

    sweep = commands.add_parser('sweep', help='Model-check many instances')
    common(sweep)
    sweep.add_argument('--algorithm', default='auto')
    sweep.add_argument('--mbr', default='3x3', help='Rectangle cap for grid sweeps')
    sweep.add_argument('--robots', type=int, default=4, help='Maximum number of robots')
    sweep.add_argument('--multiplicity', type=int, help='Maximum robots per vertex')
    sweep.add_argument('--placements', default='exhaustive', choices=['exhaustive', 'random'])
    sweep.add_argument('--samples', type=int, default=1000)
    sweep.add_argument('--schedule', default='all', choices=['all', 'canonical', 'sampled'])
    sweep.add_argument('--resolver', default='adversarial', choices=['adversarial', 'canonical'])
    sweep.add_argument('--workers', type=int)

    adversary = commands.add_parser('adversary', help='Replay an impossibility scenario')
    common(adversary, topology_default="grid")
    adversary.add_argument('--scenario', default='p2',
                           choices=['p2', 'full', 'clique', 'bipartite', 'clique-fill', 'p3'])
    adversary.add_argument('--scenario-file', help='Scenario JSON written by a sweep or --save-scenario')
    adversary.add_argument('--algorithm', help='Strawman to run against')
    adversary.add_argument('--n', type=int, default=3, help='Size of K_n or K_{n,n}')
    adversary.add_argument('--p3-class', default='path')
    adversary.add_argument('--save-scenario', action='store_true')
    adversary.add_argument('--skip-initial-check', action='store_true',
                           help='Run the placement even if it is in the ungatherable set')

    certify = commands.add_parser('certify', help='Certify the synthesized move tables')
    certify.add_argument('--table', default='all', choices=['q3', 'grid', 'all'])
    certify.add_argument('--out')

    export = commands.add_parser('export-graph', help='Write a transition graph as DOT text')
    group = export.add_mutually_exclusive_group(required=True)
    group.add_argument('--table', choices=['q3', 'grid'])
    group.add_argument('--tasks', choices=['hypercube', 'grid'])
    export.add_argument('--out')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    try:
        cli = GatheringCLI()
    except ValueError as e:
        print(f"❌ Failed to initialize: {e}")
        return EXIT_INPUT

    handlers = {
        "simulate": cli.simulate,
        "sweep": cli.sweep,
        "adversary": cli.adversary,
        "certify": cli.certify,
        "export-graph": cli.export_graph,
    }
    try:
        return handlers[args.command](args)
    except (InputError, ValueError) as e:
        print(f"❌ {e}")
        return EXIT_INPUT
    except (ContractViolation, CapabilityError) as e:
        print(f"❌ {e}")
        cli.logger.error(f"{args.command} failed: {e}")
        return EXIT_INPUT
    except GatheringError as e:
        log_critical_error(f"{args.command} failed", e)
        print(f"❌ {e}")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
