#pragma once

#include <adt/analysis.hpp>
#include <adt/clock_sync.hpp>
#include <adt/coefficient_k.hpp>
#include <adt/envelope.hpp>
#include <adt/errors.hpp>
#include <adt/fixation_detector.hpp>
#include <adt/gaze.hpp>
#include <adt/measure_hub.hpp>
#include <adt/measure_point.hpp>
#include <adt/pubsub.hpp>
#include <adt/recording.hpp>
#include <adt/reorder_buffer.hpp>
#include <adt/restream.hpp>
#include <adt/ripa.hpp>
#include <adt/savitzky_golay.hpp>
#include <adt/session.hpp>
#include <adt/session_config.hpp>
#include <adt/session_pipeline.hpp>
#include <adt/source.hpp>
#include <adt/synthetic.hpp>
