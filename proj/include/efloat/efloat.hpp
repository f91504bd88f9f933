#pragma once

// Umbrella header for the EFloat library.

#include "efloat/bitstream.hpp"
#include "efloat/codec.hpp"
#include "efloat/container.hpp"
#include "efloat/entropy.hpp"
#include "efloat/error.hpp"
#include "efloat/eval.hpp"
#include "efloat/fp_bits.hpp"
#include "efloat/model.hpp"
#include "efloat/parallel.hpp"
#include "efloat/synth.hpp"
