"""Scenario configuration and batch runs, with CSV export."""

from .presets import builtin_presets
from .runner import ResultSet, export_csv, run_attack, run_scenario, sub_seed
from .scenario import Scenario, load_scenario, preset_scenario
