#pragma once

#include "iaa/agreement.hpp"
#include "iaa/distance.hpp"
#include "iaa/error.hpp"
#include "iaa/geometry.hpp"
#include "iaa/io.hpp"
#include "iaa/kde.hpp"
#include "iaa/metric_check.hpp"
#include "iaa/model.hpp"
#include "iaa/multi_object.hpp"
#include "iaa/noise.hpp"
#include "iaa/random.hpp"
#include "iaa/ranking.hpp"
#include "iaa/tree.hpp"
#include "iaa/validate.hpp"
#include "iaa/vector_text.hpp"
