#pragma once

// dagforge: a compiler and runtime toolchain that turns natural-language
// workflow descriptions into typed, effect-aware DAGs, resolves them through
// the six-level type-floor lattice, and executes them with journaled,
// rollback-capable side effects.

#include "dagforge/common/doc.hpp"
#include "dagforge/common/error.hpp"
#include "dagforge/common/hash.hpp"
#include "dagforge/common/value.hpp"

#include "dagforge/expr/ast.hpp"
#include "dagforge/expr/check.hpp"
#include "dagforge/expr/eval.hpp"
#include "dagforge/expr/parse.hpp"

#include "dagforge/graph/graph.hpp"
#include "dagforge/graph/ops.hpp"
#include "dagforge/graph/serialize.hpp"
#include "dagforge/graph/validate.hpp"

#include "dagforge/fill/fill.hpp"
#include "dagforge/fill/schema.hpp"

#include "dagforge/provider/gateway.hpp"
#include "dagforge/provider/mock.hpp"
#include "dagforge/provider/provider.hpp"

#include "dagforge/compiler/compile.hpp"
#include "dagforge/compiler/compose.hpp"
#include "dagforge/compiler/prompts.hpp"
#include "dagforge/compiler/resolve.hpp"

#include "dagforge/runtime/exec.hpp"
#include "dagforge/runtime/interpret.hpp"
#include "dagforge/runtime/journal.hpp"
#include "dagforge/runtime/node_exec.hpp"
#include "dagforge/runtime/speculate.hpp"
#include "dagforge/runtime/synth.hpp"
#include "dagforge/runtime/tools.hpp"

#include "dagforge/cli/dispatch.hpp"
#include "dagforge/cli/store.hpp"
#include "dagforge/cli/uri.hpp"
