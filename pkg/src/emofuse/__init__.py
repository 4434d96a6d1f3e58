"""Hybrid essay emotion classification.

Fuses a transformer CLS representation with a CNN feature over
emotion-enriched word embeddings and a 6-dim lexicon intensity vector,
classified by a single linear softmax head. Ships corpus ingestion,
preprocessing, the training/evaluation protocol with seeded ablation
runs, and a CLI.
"""

from .config import AppConfig, ColumnsConfig, PathsConfig, PreprocessConfig
from .corpus import (
    DEFAULT_LABELS,
    DatasetSplit,
    EmptyDatasetError,
    Essay,
    LabelSet,
    class_distribution,
    load_dataset,
)
from .encoder import ClsEncoder, EncoderConfig, ProjectionHead
from .ewe import (
    EMBEDDING_DIM,
    CnnBranch,
    CnnConfig,
    EmbeddingMatrix,
    build_matrix,
    essay_to_matrix,
    token_indices,
)
from .fusion import ClassifierHead, FeatureBundle, classify, fuse, predict, predict_batch
from .metrics import RunMetrics, accuracy, confusion_matrix, macro_f1, per_class_f1
from .model import (
    VARIANTS,
    FeaturizedSplit,
    HybridEmotionClassifier,
    featurize_split,
    fused_dim,
)
from .nrc import EMOTION_ORDER, NRC_DIM, NrcLexicon, batch_score, load_lexicon, score_essay
from .preprocess import (
    TokenSequence,
    clean_text,
    load_stopwords,
    preprocess_text,
    remove_stopwords,
    tokenize_truncate,
)
from .training import (
    AblationReport,
    AblationRun,
    EarlyStopping,
    EpochRecord,
    TrainConfig,
    TrainResult,
    evaluate,
    run_ablation,
    run_training_loop,
    set_seed,
    train,
    validation_pass,
)

__version__ = "0.1.0"
