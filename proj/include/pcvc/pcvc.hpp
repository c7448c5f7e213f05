#pragma once

// Umbrella header: the whole voxel-cloud color codec toolkit.

#include "pcvc/bitstream.hpp"
#include "pcvc/byte_codec.hpp"
#include "pcvc/codec.hpp"
#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/graph_transform.hpp"
#include "pcvc/metrics.hpp"
#include "pcvc/motion.hpp"
#include "pcvc/mv_pack.hpp"
#include "pcvc/ply.hpp"
#include "pcvc/quant.hpp"
#include "pcvc/raht.hpp"
#include "pcvc/rlgr.hpp"
#include "pcvc/superres.hpp"
#include "pcvc/sweep.hpp"
#include "pcvc/synth.hpp"
#include "pcvc/vec3.hpp"
#include "pcvc/voxel_grid.hpp"
