"""Cross-lingual predicate alignment between RDF graphs."""

from predmap.evaluation import EvaluationReport, Rating, cohens_kappa, evaluate, load_gold, synth_bilingual
from predmap.fallback import DictionaryProvider, LabelIndex, edit_distance, map_predicate_fallback
from predmap.indirect import CandidateScore, IndirectResult, candidate_scores, confidence_of, map_predicate_indirect
from predmap.interlink import LinkTable, PairSet, load_link_files, load_links, map_pair_set, map_term, title_of
from predmap.pipeline import AlignConfig, MappingResult, Method, Mode, align_all, align_one, write_mappings
from predmap.triple_store import IRI, Literal, Triple, TripleStore, build_store, load_store, parse_ntriples

__version__ = "0.1.0"
