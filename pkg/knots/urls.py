from django.urls import path
from . import views

urlpatterns = [
    path('knots/', views.knot_list, name='knot_list'),
    path('knots/<str:name>/', views.knot_detail, name='knot_detail'),
    path('reports/<int:pk>/', views.report_detail, name='report_detail'),
]
