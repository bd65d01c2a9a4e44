"""Fixture authority: issuing, scenario generation, reference oracle and benchmarks."""

from .bench import BenchReport, BenchRow, run_bench
from .issuer import ATTRIBUTE_ALIASES, PRIVATE_CRITICAL_EXT, ROLE, Authority, Entity, entity_name
from .oracle import oracle_manifest
from .presets import PRESETS, preset
from .scenario import ClientFixture, Scenario, ScenarioSpec, generate_scenario, resolve_time
from .workspace import Workspace
