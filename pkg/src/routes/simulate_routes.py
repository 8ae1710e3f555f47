from src.controllers.simulation_controller import SimulationController
from src.routes.analyze_routes import add_fit_arguments
from src.utils.report_writer import emit, study_to_csv
import sys


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="coverage and width study of the four interval methods")
    parser.add_argument("config_file", nargs="?", help="study config (.json or KEY=value text)")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config file)")
    parser.add_argument("--trials", type=int, help="number of trials (overrides the config file)")
    parser.add_argument("--draws", type=int, help="posterior draws per trial (overrides the config file)")
    parser.add_argument("--level", type=float, help="interval level (overrides the config file)")
    parser.add_argument("--output", help="write the CSV here instead of stdout")
    parser.set_defaults(handler=handle_simulate)


def handle_simulate(args) -> int:
    overrides = {
        key: value
        for key, value in (
            ("master_seed", args.seed),
            ("n_trials", args.trials),
            ("n_draws", args.draws),
            ("level", args.level),
        )
        if value is not None
    }
    controller = SimulationController()
    config = controller.load_config(args.config_file, overrides)
    result = controller.simulate(config)
    emit(study_to_csv(result, args.sig_digits), args.output, sys.stdout)
    return 0
