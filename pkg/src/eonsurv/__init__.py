"""Survivability simulator for elastic optical networks under dual link failure."""

from eonsurv.topology import Link, Path, Topology, load_builtin, load_file, shortest_path, disjoint_pair
from eonsurv.spectrum import Mode, SlotBlock, SpectrumGrid
from eonsurv.timing import TimingParams, RecoveryTime
from eonsurv.protection import Scheme, Request, Connection, ProvisionOutcome, provision
from eonsurv.failure import FailureScenario, Impact, RecoveryOutcome, enumerate_scenarios, recover
from eonsurv.workload import WorkloadSpec, generate
from eonsurv.harness import ExperimentConfig, run_experiment, emit

__version__ = "0.1.0"
