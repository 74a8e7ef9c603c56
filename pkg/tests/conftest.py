"""Shared test configuration.

Hypothesis runs derandomized so that failures reproduce across machines and
reruns; example counts are tuned down on the heavier algebraic properties to
keep the full suite's runtime dominated by the solver-backed tests rather
than by property generation.
"""

import os

from hypothesis import HealthCheck, settings

# A conic solve that breaks down numerically is reported as a failed solve
# and handled; the Rust-side backtrace it would print adds nothing to test
# output.
os.environ.setdefault("RUST_BACKTRACE", "0")

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
