#pragma once

#include "nodelife/battery_models.hpp"
#include "nodelife/energy_model.hpp"
#include "nodelife/errors.hpp"
#include "nodelife/io.hpp"
#include "nodelife/load_power.hpp"
#include "nodelife/node_sim.hpp"
#include "nodelife/polyfit.hpp"
