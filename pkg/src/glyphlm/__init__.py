"""glyphlm: frozen visual token embeddings from Unicode glyph bitmaps.

The toolkit renders every vocabulary token into a monochrome bitmap from a
`.hex` bitmap font, standardizes the bitmaps to a fixed square resolution,
projects them to the model dimension with PCA, and freezes the result as
the input embedding of a small decoder-only transformer.  A Unicode-centric
tokenizer with universal text coverage and a trainable/frozen/random
embedding ablation harness round out the pipeline.
"""

__version__ = "0.1.0"

from .fontstore import GlyphBitmap, GlyphStore, load_font, parse_hex_line
from .univoc import (
    Vocab,
    build_vocab,
    import_external_vocab,
    mine_ngrams,
    avg_chars_per_token,
    load_vocab,
    save_vocab,
)
from .glyphrender import TokenImage, render_token, resize_bilinear, token_raw_vector
from .pca import PCAModel, fit as fit_pca
from .embedmat import (
    EmbeddingMatrix,
    build_visual_embeddings,
    build_random_embeddings,
    load_embeddings,
    save_embeddings,
)
from .nanoformer import (
    ModelConfig,
    Parameters,
    TrainHyper,
    forward,
    cross_entropy,
    train,
    perplexity,
    generate,
)

__all__ = [
    "GlyphBitmap",
    "GlyphStore",
    "load_font",
    "parse_hex_line",
    "Vocab",
    "build_vocab",
    "import_external_vocab",
    "mine_ngrams",
    "avg_chars_per_token",
    "load_vocab",
    "save_vocab",
    "TokenImage",
    "render_token",
    "resize_bilinear",
    "token_raw_vector",
    "PCAModel",
    "fit_pca",
    "EmbeddingMatrix",
    "build_visual_embeddings",
    "build_random_embeddings",
    "load_embeddings",
    "save_embeddings",
    "ModelConfig",
    "Parameters",
    "TrainHyper",
    "forward",
    "cross_entropy",
    "train",
    "perplexity",
    "generate",
]
