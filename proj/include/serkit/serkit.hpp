#pragma once

#include "serkit/config.hpp"
#include "serkit/dsp.hpp"
#include "serkit/elm.hpp"
#include "serkit/error.hpp"
#include "serkit/eval.hpp"
#include "serkit/experiment.hpp"
#include "serkit/functionals.hpp"
#include "serkit/gabor.hpp"
#include "serkit/io.hpp"
#include "serkit/pqpso.hpp"
#include "serkit/selection.hpp"
#include "serkit/types.hpp"
#include "serkit/wav.hpp"
