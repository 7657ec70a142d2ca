#pragma once

#include "ofdmml/flops.hpp"
#include "ofdmml/numerics/conv.hpp"
#include "ofdmml/numerics/dft.hpp"
#include "ofdmml/numerics/linalg.hpp"
#include "ofdmml/numerics/matrix.hpp"
#include "ofdmml/numerics/rng.hpp"
#include "ofdmml/modem/frame.hpp"
#include "ofdmml/modem/pilots.hpp"
#include "ofdmml/modem/qam.hpp"
#include "ofdmml/channel/channel.hpp"
#include "ofdmml/estimators/estimators.hpp"
#include "ofdmml/neural/adam.hpp"
#include "ofdmml/neural/checkpoint.hpp"
#include "ofdmml/neural/mlp.hpp"
#include "ofdmml/neural/trainer.hpp"
#include "ofdmml/elm/elm.hpp"
#include "ofdmml/elm/elm_io.hpp"
#include "ofdmml/allocation/allocation.hpp"
#include "ofdmml/harness/campaign.hpp"
#include "ofdmml/harness/complexity.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/harness/dnn_detector.hpp"
#include "ofdmml/harness/link.hpp"
#include "ofdmml/harness/metrics.hpp"
#include "ofdmml/harness/plot.hpp"
#include "ofdmml/harness/theory.hpp"
#include "ofdmml/harness/timing.hpp"
