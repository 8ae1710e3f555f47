from src.controllers.density_controller import DensityController
from src.models.evalue import DensityVariant
from src.utils.report_writer import emit, frame_to_csv
import sys

PARAM_FLAGS = ("eta", "tau", "p_obs", "sd_y", "mu_q", "sigma_q", "alpha", "beta", "mu_rr", "sigma_rr", "beta_v")


def register(subparsers):
    parser = subparsers.add_parser("density", help="closed-form E-value pdf and cdf over a grid")
    parser.add_argument("variant", choices=[v.value for v in DensityVariant])
    for flag in PARAM_FLAGS:
        parser.add_argument("--" + flag.replace("_", "-"), dest=flag, type=float)
    parser.add_argument("--v-min", type=float, default=1.01)
    parser.add_argument("--v-max", type=float, default=10.0)
    parser.add_argument("--points", type=int, default=100)
    parser.add_argument("--log-grid", action="store_true", help="geometric instead of linear spacing")
    parser.add_argument("--output", help="write the CSV here instead of stdout")
    parser.set_defaults(handler=handle_density)


def handle_density(args) -> int:
    controller = DensityController()
    params = controller.build_params(args.variant, {flag: getattr(args, flag) for flag in PARAM_FLAGS})
    grid = controller.grid(args.v_min, args.v_max, args.points, args.log_grid)
    emit(frame_to_csv(controller.evaluate(params, grid), args.sig_digits), args.output, sys.stdout)
    return 0
