"""Resolve conflicting query attributes with catalog co-occurrence statistics."""
from .catalog import (AttributeSchema, Item, KnowledgeGraph, build_graph, load_catalog,
                      load_graph, save_graph, write_catalog)
from .errors import (CatalogKGError, FingerprintMismatch, InputFormatError, SchemaError,
                     SnapshotError)
from .evaluation import Judgment, PRF1Report, Ranker, ndcg_at_k, prf1, rank_items
from .features import FeatureVector, featurize, presence_score, value_score
from .lexicon import (AnchorAssignment, CandidateSpan, Dictionary, Query, anchors,
                      build_dictionary, detect_conflicts, extract_candidates)
from .model import (Model, TrainConfig, baseline_predict, load_model, predict, save_model,
                    train, train_test_split)
from .pipeline import AttributeResolver, evaluate
from .synth import (LabeledQuery, SynthConfig, generate_catalog, generate_judgments,
                    generate_labeled_queries)

__version__ = "0.1.0"
