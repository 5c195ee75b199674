"""Human-in-the-loop machine translation refinement toolkit.

Draft translations come from a chat model; revision demonstrations retrieved
from a growing store steer an in-context refinement pass; human post-edits
feed the store through the review service. See the README for the workflow.
"""

from .feedback import EditOp, EditScript, FeedbackRecord, apply_script, backtrace, cost_matrix, generate_feedback, render_feedback
from .gateway import ChatMessage, GatewayConfig, GenerationParams, create_gateway
from .metrics import EvaluationReport, analyze_corpus, bleu_corpus, evaluate_corpus, ter, ter_corpus
from .pipeline import PipelineConfig, PromptTemplates, TranslationRecord, collect_feedback, translate_corpus
from .retrieval import BM25Index, RetrievalConfig, ScoredDemo, bm25_score, build_index, recall_score, retrieve
from .store import DemonstrationRecord, DemoStore
from .textops import ngrams, tokenize

__version__ = "0.1.0"

__all__ = [
    "EditOp", "EditScript", "FeedbackRecord", "apply_script", "backtrace", "cost_matrix",
    "generate_feedback", "render_feedback",
    "ChatMessage", "GatewayConfig", "GenerationParams", "create_gateway",
    "EvaluationReport", "analyze_corpus", "bleu_corpus", "evaluate_corpus", "ter", "ter_corpus",
    "PipelineConfig", "PromptTemplates", "TranslationRecord", "collect_feedback", "translate_corpus",
    "BM25Index", "RetrievalConfig", "ScoredDemo", "bm25_score", "build_index", "recall_score", "retrieve",
    "DemonstrationRecord", "DemoStore",
    "ngrams", "tokenize",
    "__version__",
]
