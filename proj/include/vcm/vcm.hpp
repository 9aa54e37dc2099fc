#pragma once

#include "vcm/error.hpp"
#include "vcm/core/records.hpp"
#include "vcm/core/tensor_io.hpp"
#include "vcm/core/types.hpp"
#include "vcm/feature/arith_coder.hpp"
#include "vcm/feature/packing.hpp"
#include "vcm/feature/quant.hpp"
#include "vcm/feature/reorder.hpp"
#include "vcm/feature/sidecar.hpp"
#include "vcm/feature/stream.hpp"
#include "vcm/feature/volume_io.hpp"
#include "vcm/metrics/detection.hpp"
#include "vcm/metrics/distortion.hpp"
#include "vcm/metrics/tracking.hpp"
#include "vcm/pipeline/codec.hpp"
#include "vcm/pipeline/experiment.hpp"
#include "vcm/pipeline/image.hpp"
#include "vcm/rd/bd.hpp"
#include "vcm/rd/curve.hpp"
#include "vcm/rd/rate.hpp"
#include "vcm/report/config.hpp"
#include "vcm/report/report.hpp"
#include "vcm/report/svg.hpp"
