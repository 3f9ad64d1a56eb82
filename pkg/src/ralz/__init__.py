"""LZ78 compression with random access into the compressed stream."""

from ._jit import BACKEND
from .api import (access, access_many, baseline_header, compress, extract,
                  lz78_compress, make_header, sequential_access)
from .codec import Header, Scheme, WordStream, load, save, word_width
from .det import det_access, det_access_many, det_compress, det_extract
from .encoder import (AccessTrace, Compressor, accounting, accounting_holds, decompress,
                      open_prefix, phrases)
from .errors import (AlphabetError, CapacityError, MalformedStreamError,
                     NoRandomAccessError, ParameterError, PositionError, RalzError,
                     SpannerIntegrityError, TruncatedStreamError, WeakEpsilonWarning)
from .lz78 import Phrase, TrieNode, as_symbols, lz78_decode, lz78_encode, lz78_parse
from .rand import (SchemeParams, audit_randomized, find_depth, find_node_by_depth,
                   rand_access, rand_access_many, rand_compress, rand_decompress,
                   rand_extract)
from .spanner import SpannerConfig, f, jump_target, navigate

__version__ = "0.1.0"
