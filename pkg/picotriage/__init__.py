__version__ = "0.1.0"

from .network import (BayesianNetwork, Variable, Cpt, CptRow, CptDeclaration,
                      validate_network, joint_probability)

from .evidence import EvidenceSet, apply_virtual_evidence

from .inference import (Marginals, infer_marginals, enumerate_marginals,
                        joint_distribution)

from .sampling import ancestral_sample, ancestral_samples, empirical_marginals

from .document import NetworkDocument
from .document import compile as compile_network

from .deserializer import Deserializer, parse_network, fromfile, fromstring, fromdict, fromjson

from .serializer import Serializer, serialize_network, tofile, tostring, todict, tojson

from .triage import (VitalField, FIELDS, ElicitationBand, DecisionPolicy, GoldenWindow,
                     Assessment, band_to_probability, decide_assessment,
                     in_golden_window, default_triage_network)

from .fusion import (PredictionMessage, FusionPolicy, CasualtyRecord, CasualtyRegistry,
                     FusionService, ScanComplete, Snapshot, match_casualty, ingest,
                     build_evidence, run_inference, read_events, write_events,
                     write_snapshots)

from .scoring import (GroundTruth, ScoreReport, Metrics, score_field_gw,
                      score_trauma_group, score_alertness_group, score_casualty,
                      compute_metrics, compare_metrics, random_baseline_accuracy)

from .sim import (SensorModel, ScenarioConfig, Scenario, generate_scenario,
                  emit_observations, run_simulation, sweep)

from . import errors
