#pragma once

#include "beatmotion/audio.hpp"
#include "beatmotion/choreo.hpp"
#include "beatmotion/cli.hpp"
#include "beatmotion/dataset.hpp"
#include "beatmotion/mocap.hpp"
#include "beatmotion/model_io.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/optim.hpp"
#include "beatmotion/train.hpp"
#include "beatmotion/wav.hpp"
