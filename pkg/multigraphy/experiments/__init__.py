from ._sourceloc import SourceLocTask
from ._sourceloc import diffuse_sources
from ._sourceloc import generate_sourceloc_dataset
from ._sourceloc import run_sourceloc_experiment
from ._sourceloc import sbm_multigraph
from ._wireless import PowerAllocation
from ._wireless import WirelessEnv
from ._wireless import build_policy
from ._wireless import channel_gain
from ._wireless import fspl
from ._wireless import heuristic_policy
from ._wireless import policy_input
from ._wireless import run_wireless_experiment
from ._wireless import sample_channels
from ._wireless import sum_rate
from ._wireless import sum_rate_gradient

__all__ = [
    "PowerAllocation",
    "SourceLocTask",
    "WirelessEnv",
    "build_policy",
    "channel_gain",
    "diffuse_sources",
    "fspl",
    "generate_sourceloc_dataset",
    "heuristic_policy",
    "policy_input",
    "run_sourceloc_experiment",
    "run_wireless_experiment",
    "sample_channels",
    "sbm_multigraph",
    "sum_rate",
    "sum_rate_gradient",
]
