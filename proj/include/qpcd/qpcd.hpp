#pragma once

#include "qpcd/climb.hpp"
#include "qpcd/cuts.hpp"
#include "qpcd/dnn.hpp"
#include "qpcd/driver.hpp"
#include "qpcd/error.hpp"
#include "qpcd/generate.hpp"
#include "qpcd/instance_io.hpp"
#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"
#include "qpcd/numlin.hpp"
#include "qpcd/oracle.hpp"
#include "qpcd/report.hpp"
