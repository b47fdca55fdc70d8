"""Indexed streams: key-ordered iterators with seek, fused combinators and
nested evaluation into containers."""

from .combinators import (MaskJoin, Mapped, Filtered, Repeat, ZipWith, filter_, map_, mul,
                          repeat, slice_, sum_, zip_with)
from .core import (BOTTOM, TOP, Contraction, ExtendedIndex, Finite, FuelExhausted,
                   IndexedStream, MaskFn, SeekTarget, StepCounter, count_steps,
                   extended_index, fold, fold_protocol, next_state, take_left, take_right)
from .evaluate import (DenseVecBuilder, MapSink, SparseVecBuilder, compiled, contract,
                       eval_aggregate, eval_into, eval_nested, map_of_maps, memo, to_stream)
from .fusion import NotFusable
from .rbtree import OrderedTreeMap, TreeStream, successor, tree_seek, tree_stream
from .semantics import (FinMap, LawReport, check_all, check_bounded, check_lawful,
                        check_monotone, check_strict_mono, finmap_of, mul_spec, sem_eval)
from .sources import (ConstructionError, DenseVec, Range, Singleton, SparseVec, dense, mask,
                      range_, singleton, sparse_gallop, sparse_linear, unordered)

__all__ = [name for name in dir() if not name.startswith("_")]
