from typing import Dict, List
from src.models.evalue import IntervalMethod
from src.utils.errors import UsageError

INTERVAL_METHODS_CONFIG = {
    # ASYMPTOTIC BASELINES
    IntervalMethod.TAYLOR: {
        "name": "Taylor series",
        "family": "asymptotic",
        "description": "Delta-method interval from the linearized IPW variance",
        "needs_samples": True,
        "needs_posterior": False,
    },
    IntervalMethod.POISSON: {
        "name": "Poisson sampling",
        "family": "asymptotic",
        "description": "Delta-method interval from the Horvitz-Thompson Poisson-design variance",
        "needs_samples": True,
        "needs_posterior": False,
    },

    # BAYESIAN
    IntervalMethod.SUBJECTIVE: {
        "name": "Subjective Bayes",
        "family": "bayesian",
        "description": "Credible interval under the empirically fitted Normal-Inverse-Wishart prior",
        "needs_samples": False,
        "needs_posterior": True,
    },
    IntervalMethod.OBJECTIVE: {
        "name": "Objective Bayes",
        "family": "bayesian",
        "description": "Credible interval under the independent Jeffreys prior",
        "needs_samples": False,
        "needs_posterior": True,
    },
}

FAMILIES = sorted({config["family"] for config in INTERVAL_METHODS_CONFIG.values()})
SELECTIONS = ["all"] + FAMILIES + [method.value for method in INTERVAL_METHODS_CONFIG]


def get_method_config(method: IntervalMethod) -> Dict:
    return INTERVAL_METHODS_CONFIG.get(method, {})


def get_all_methods() -> List[IntervalMethod]:
    return list(INTERVAL_METHODS_CONFIG)


def get_methods_by_family(family: str) -> List[IntervalMethod]:
    return [method for method, config in INTERVAL_METHODS_CONFIG.items() if config["family"] == family]


def resolve_methods(selection: str) -> List[IntervalMethod]:
    """'all', a method family or a single method name, in report order."""
    if selection == "all":
        return get_all_methods()
    if selection in FAMILIES:
        return get_methods_by_family(selection)
    try:
        method = IntervalMethod(selection)
    except ValueError:
        raise UsageError(f"unknown method {selection!r}; choose from {', '.join(SELECTIONS)}")
    if method not in INTERVAL_METHODS_CONFIG:
        raise UsageError(f"method {selection!r} is not an interval method")
    return [method]
