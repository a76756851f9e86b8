#ifndef IDRISK_IDRISK_HPP
#define IDRISK_IDRISK_HPP

// Umbrella header for the identification-risk analysis toolkit.

#include "idrisk/attack.hpp"
#include "idrisk/csv.hpp"
#include "idrisk/eval.hpp"
#include "idrisk/features.hpp"
#include "idrisk/geo.hpp"
#include "idrisk/ingest.hpp"
#include "idrisk/report.hpp"
#include "idrisk/rng.hpp"
#include "idrisk/stats.hpp"
#include "idrisk/synth.hpp"
#include "idrisk/timeutil.hpp"
#include "idrisk/types.hpp"

#endif // IDRISK_IDRISK_HPP
