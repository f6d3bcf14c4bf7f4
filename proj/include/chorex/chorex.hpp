#pragma once

#include "chorex/ast.hpp"
#include "chorex/checks.hpp"
#include "chorex/civ.hpp"
#include "chorex/codec.hpp"
#include "chorex/evaluator.hpp"
#include "chorex/interp.hpp"
#include "chorex/lexer.hpp"
#include "chorex/message.hpp"
#include "chorex/monitor.hpp"
#include "chorex/parser.hpp"
#include "chorex/pretty.hpp"
#include "chorex/projection.hpp"
#include "chorex/runtime.hpp"
#include "chorex/session.hpp"
#include "chorex/stack.hpp"
#include "chorex/transport.hpp"
#include "chorex/value.hpp"
